"""Annealing schedules: time -> (s, lambda) control paths.

Four kinds are supported.  Conventional QA keeps lambda = 1 and ramps s
linearly.  ARA moves both controls from 0 to 1; the default is the diagonal
s = lambda = t/tau, and arbitrary piecewise-linear paths are available as
custom point tables.  IRA cycles keep lambda = 1 and run s through the
symmetric quadratic s(t) = s_min + (1 - s_min)(2t/tau - 1)^2, so a cycle
starts and ends at s = 1 and dips to s_min at mid-cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = ["Schedule"]

KIND_TABLE = 0
KIND_IRA_QUADRATIC = 1


@dataclass(frozen=True)
class Schedule:
    kind: str  # "qa" | "ara_linear" | "ara_custom" | "ira_quadratic"
    tau: float
    s_min: float | None = None
    points: tuple[tuple[float, float, float], ...] | None = None  # (t, s, lam)

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.kind == "ira_quadratic":
            if self.s_min is None or not 0.0 < self.s_min <= 1.0:
                raise ConfigError(f"IRA schedule needs s_min in (0, 1], got {self.s_min}")
        elif self.kind in ("qa", "ara_linear"):
            pass
        elif self.kind == "ara_custom":
            pts = self.points
            if not pts or len(pts) < 2:
                raise ConfigError("custom schedule needs at least two (t, s, lam) points")
            ts = [p[0] for p in pts]
            if ts[0] != 0.0 or abs(ts[-1] - self.tau) > 1e-12 * self.tau:
                raise ConfigError("custom schedule must span t = 0 .. tau")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ConfigError("custom schedule times must be strictly increasing")
            for _, s, lam in pts:
                if not (0.0 <= s <= 1.0 and 0.0 <= lam <= 1.0):
                    raise ConfigError("custom schedule controls must lie in [0, 1]")
        else:
            raise ConfigError(f"unknown schedule kind {self.kind!r}")

    # -- constructors ------------------------------------------------------
    @classmethod
    def qa(cls, tau: float) -> "Schedule":
        return cls(kind="qa", tau=tau)

    @classmethod
    def ara_linear(cls, tau: float) -> "Schedule":
        return cls(kind="ara_linear", tau=tau)

    @classmethod
    def ara_custom(cls, tau: float, points) -> "Schedule":
        return cls(kind="ara_custom", tau=tau, points=tuple(tuple(p) for p in points))

    @classmethod
    def ira(cls, tau: float, s_min: float) -> "Schedule":
        return cls(kind="ira_quadratic", tau=tau, s_min=s_min)

    @classmethod
    def frozen(cls, tau: float, s: float, lam: float) -> "Schedule":
        """Constant (s, lambda): useful for conservation and spectrum tests."""
        return cls.ara_custom(tau, [(0.0, s, lam), (tau, s, lam)])

    # -- evaluation --------------------------------------------------------
    def table(self):
        """(t, s, lam) arrays describing the path; None for the IRA quadratic."""
        if self.kind == "qa":
            pts = [(0.0, 0.0, 1.0), (self.tau, 1.0, 1.0)]
        elif self.kind == "ara_linear":
            pts = [(0.0, 0.0, 0.0), (self.tau, 1.0, 1.0)]
        elif self.kind == "ara_custom":
            pts = self.points
        else:
            return None
        a = np.asarray(pts, dtype=float)
        return a[:, 0].copy(), a[:, 1].copy(), a[:, 2].copy()

    def kernel_args(self):
        """(kind_code, s_min, tbl_t, tbl_s, tbl_lam) for the evolution kernels."""
        if self.kind == "ira_quadratic":
            z = np.zeros(0)
            return KIND_IRA_QUADRATIC, float(self.s_min), z, z, z
        ts, ss, ls = self.table()
        return KIND_TABLE, 0.0, ts, ss, ls

    def s_of(self, t):
        if self.kind == "ira_quadratic":
            x = 2.0 * np.asarray(t) / self.tau - 1.0
            return self.s_min + (1.0 - self.s_min) * x * x
        ts, ss, _ = self.table()
        return np.interp(t, ts, ss)

    def lam_of(self, t):
        if self.kind == "ira_quadratic":
            return np.ones_like(np.asarray(t, dtype=float))
        ts, _, ls = self.table()
        return np.interp(t, ts, ls)

    def reversed(self) -> "Schedule":
        """The time-mirrored path t -> (s(tau - t), lambda(tau - t))."""
        if self.kind == "ira_quadratic":
            return self  # symmetric about tau/2
        ts, ss, ls = self.table()
        pts = [(self.tau - t, s, lam) for t, s, lam in zip(ts[::-1], ss[::-1], ls[::-1])]
        return Schedule.ara_custom(self.tau, pts)
