"""Serializable result bundle shared by the circle and grid pipelines."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field


@dataclass
class DeficiencyReport:
    """Everything needed to check ``def == 1 - m + mor``.

    ``ell`` is the minimal labelling of the energy ``energy`` in the base
    spectrum, ``m`` the multiplicity of that eigenvalue and ``mor`` the
    Morse index of the DN matrix just above it.
    """

    k: int
    ell: int
    m: int
    mor: int
    epsilon: float
    energy: float
    equipartition_residual: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def def_(self) -> int:
        return self.ell - self.k

    @property
    def identity_residual(self) -> int:
        return abs(self.def_ - (1 - self.m + self.mor))

    def ok(self) -> bool:
        return self.identity_residual == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["def"] = self.def_
        d["identity_residual"] = self.identity_residual
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DeficiencyReport":
        keys = ("k", "ell", "m", "mor", "epsilon", "energy", "equipartition_residual", "extras")
        return cls(**{key: d[key] for key in keys if key in d})

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_jsonable, **kw)


def _jsonable(x):
    # numpy scalars and tuples inside ``extras``
    if hasattr(x, "item"):
        return x.item()
    if hasattr(x, "tolist"):
        return x.tolist()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")
