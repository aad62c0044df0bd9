"""Margin records and input digests shared by the verification code."""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field

import numpy as np

SLACK_RTOL = 1e-7


def digest(*objs) -> str:
    """Stable short hash of series, measures, potentials and plain numbers."""
    h = hashlib.sha256()
    for obj in objs:
        _feed(h, obj)
    return h.hexdigest()[:16]


def _feed(h, obj):
    from .measures import CircleMeasure, FourierSeries, Potential

    if isinstance(obj, FourierSeries):
        c = obj.trimmed().coeffs
        h.update(b"S")
        h.update(np.ascontiguousarray(c).tobytes())
    elif isinstance(obj, Potential):
        h.update(b"Q")
        _feed(h, obj.series)
    elif isinstance(obj, CircleMeasure):
        h.update(b"M" + obj.kind.encode())
        if obj.is_dirac:
            h.update(np.float64(obj.atom_angle).tobytes())
        else:
            _feed(h, obj.density)
    elif isinstance(obj, (list, tuple)):
        for o in obj:
            _feed(h, o)
    elif obj is None:
        h.update(b"N")
    else:
        h.update(repr(obj).encode())


def passes(lhs: float, rhs: float, rtol: float = SLACK_RTOL) -> bool:
    slack = rhs - lhs
    if math.isnan(slack):
        return False
    if math.isinf(rhs) and rhs > 0:
        return True
    return slack >= -rtol * max(1.0, abs(rhs))


@dataclass
class InequalityReport:
    """Margin of one inequality ``lhs <= rhs`` on one instance."""

    name: str
    lhs: float
    rhs: float
    rho_used: float | None = None
    instance_digest: str = ""
    in_hypothesis: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return float(self.rhs - self.lhs)

    @property
    def passed(self) -> bool:
        return passes(self.lhs, self.rhs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["slack"] = self.slack
        d["passed"] = self.passed
        return d
