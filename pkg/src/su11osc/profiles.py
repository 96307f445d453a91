"""Time-dependent squared frequency omega^2(t)."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError

KINDS = ("constant", "power_law", "sampled")


@dataclass(frozen=True, eq=False)
class FrequencyProfile:
    """omega^2(t) in one of three forms.

    ``constant``:  omega^2 = omega0^2
    ``power_law``: omega^2 = omega0^2 t^alpha  (t > 0)
    ``sampled``:   monotone cubic (PCHIP) interpolation of a (t, omega^2) table
    """

    kind: str
    omega0: float = 1.0
    alpha: float = 0.0
    table_t: np.ndarray | None = None
    table_w2: np.ndarray | None = None
    _interp: PchipInterpolator | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown profile kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("constant", "power_law") and not self.omega0 > 0:
            raise DomainError("omega0 must be positive")
        if self.kind == "sampled":
            t = np.asarray(self.table_t, dtype=float)
            w2 = np.asarray(self.table_w2, dtype=float)
            if t.ndim != 1 or t.shape != w2.shape or t.size < 2:
                raise DomainError("sampled profile needs matching 1-d t and omega^2 columns")
            if np.any(np.diff(t) <= 0):
                raise DomainError("sampled profile times must be strictly increasing")
            if not np.all(np.isfinite(w2)):
                raise DomainError("sampled omega^2 values must be finite")
            object.__setattr__(self, "table_t", t)
            object.__setattr__(self, "table_w2", w2)
            object.__setattr__(self, "_interp", PchipInterpolator(t, w2, extrapolate=False))

    @classmethod
    def constant(cls, omega0):
        return cls("constant", omega0=float(omega0))

    @classmethod
    def power_law(cls, omega0, alpha):
        return cls("power_law", omega0=float(omega0), alpha=float(alpha))

    @classmethod
    def sampled(cls, t, omega_sq):
        return cls("sampled", table_t=np.asarray(t, float), table_w2=np.asarray(omega_sq, float))

    @classmethod
    def from_csv(cls, path):
        """Read a two-column ``t, omega_sq`` table (header line optional)."""
        text = Path(path).read_text().splitlines()
        rows = []
        for line in text:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                if rows:
                    raise DomainError(f"bad row in {path}: {line!r}") from None
                continue  # header
        arr = np.array(rows)
        return cls.sampled(arr[:, 0], arr[:, 1])

    def check_span(self, t0, t1):
        """Raise DomainError if omega^2 is not defined on [t0, t1]."""
        lo, hi = min(t0, t1), max(t0, t1)
        if self.kind == "power_law" and lo <= 0:
            raise DomainError("power_law profile requires t > 0 on the whole span")
        if self.kind == "sampled" and (lo < self.table_t[0] or hi > self.table_t[-1]):
            raise DomainError(
                f"span [{lo}, {hi}] leaves the sampled table range "
                f"[{self.table_t[0]}, {self.table_t[-1]}]"
            )

    def breakpoints(self, t0, t1):
        """Table knots strictly inside (t0, t1), where omega^2 is only C^1."""
        if self.kind != "sampled":
            return np.empty(0)
        lo, hi = min(t0, t1), max(t0, t1)
        k = self.table_t[(self.table_t > lo) & (self.table_t < hi)]
        return k if t1 >= t0 else k[::-1]

    def omega_sq(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.omega0**2)
        if self.kind == "power_law":
            if np.any(t <= 0):
                raise DomainError("power_law profile requires t > 0")
            return self.omega0**2 * t**self.alpha
        val = self._interp(t)
        if np.any(np.isnan(val)):
            raise DomainError("time outside the sampled table range")
        return val

    def omega_sq_dot(self, t):
        """d(omega^2)/dt."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(t)
        if self.kind == "power_law":
            if np.any(t <= 0):
                raise DomainError("power_law profile requires t > 0")
            return self.omega0**2 * self.alpha * t ** (self.alpha - 1.0)
        val = self._interp.derivative()(t)
        if np.any(np.isnan(val)):
            raise DomainError("time outside the sampled table range")
        return val

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "constant":
            d["omega0"] = self.omega0
        elif self.kind == "power_law":
            d.update(omega0=self.omega0, alpha=self.alpha)
        else:
            d.update(t=self.table_t.tolist(), omega_sq=self.table_w2.tolist())
        return d
