"""Closed-form ground-state energy, counterdiabatic cost rate and Bures angle.

Every model is a frozen dataclass exposing

* ``energy(g, convention)``
* ``cost_rate(g, gdot)``: norm of the counterdiabatic field
* ``bures(g_ref, g)``: Bures angle between instantaneous ground states
* ``g_c``: critical coupling

The module-level functions ``ground_energy``, ``cd_cost_rate`` and
``bures_angle`` dispatch to those methods.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InfiniteRateError

SQRT8 = math.sqrt(8.0)


class EnergyConvention(str, enum.Enum):
    """Which spectral quantity enters the speed numerator."""

    GROUND_STATE = "ground_state"
    GAP = "gap"


@dataclass(frozen=True)
class TwoLevelState:
    """Pure state ``c0|0> + c1|1>``."""

    c0: complex
    c1: complex

    def as_array(self):
        return np.array([self.c0, self.c1], dtype=complex)

    @classmethod
    def from_array(cls, v):
        return cls(complex(v[0]), complex(v[1]))

    @property
    def norm(self):
        return math.sqrt(abs(self.c0) ** 2 + abs(self.c1) ** 2)

    def overlap(self, other):
        """<self|other>"""
        return self.c0.conjugate() * other.c0 + self.c1.conjugate() * other.c1


def _mixing_angle(hz, hx):
    # arctan((hz - sqrt(hz^2 + hx^2)) / hx), cancellation-free for hz > 0
    r = math.hypot(hz, hx)
    if hz > 0:
        num = -hx * hx / (hz + r)
    else:
        num = hz - r
    return math.atan(num / hx)


def _angle_distance(dtheta):
    """arccos|cos(dtheta)| without the loss of precision near 0 and pi/2."""
    return math.atan2(abs(math.sin(dtheta)), abs(math.cos(dtheta)))


def _convention(convention):
    return EnergyConvention(convention)


@dataclass(frozen=True)
class LandauZener:
    """Two-level model ``H = delta*sigma_x + g*sigma_z``; critical at g = 0."""

    delta: float
    kind = "lz"
    g_c = 0.0

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError(f"delta must be positive, got {self.delta}")

    def energy(self, g, convention=EnergyConvention.GAP):
        e = math.hypot(self.delta, g)
        if _convention(convention) is EnergyConvention.GAP:
            return 2.0 * e
        return -e

    def cost_rate(self, g, gdot):
        return abs(gdot) * self.delta / (self.delta**2 + g * g)

    def angle(self, g):
        return _mixing_angle(g, self.delta)

    def bures(self, g_ref, g):
        return _angle_distance(self.angle(g) - self.angle(g_ref))

    def to_dict(self):
        return {"kind": self.kind, "delta": self.delta}


@dataclass(frozen=True)
class TFIMMode:
    """Single momentum subspace ``k_n = (2n-1) pi / (N b)`` of the Ising chain."""

    N: int
    n: int
    b: float = 1.0
    include_shift: bool = True
    omega: float = 1.0
    kind = "tfim_mode"
    g_c = 1.0

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise DomainError(f"N must be even and >= 2, got {self.N}")
        if not 1 <= self.n <= self.N // 2:
            raise DomainError(f"mode index n must lie in 1..{self.N // 2}, got {self.n}")
        if not self.b > 0:
            raise DomainError(f"lattice spacing b must be positive, got {self.b}")
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")

    @property
    def k(self):
        return (2 * self.n - 1) * math.pi / (self.N * self.b)

    @property
    def kb(self):
        return (2 * self.n - 1) * math.pi / self.N

    def h_z(self, g):
        return 2.0 * self.omega * (g - math.cos(self.kb))

    @property
    def h_x(self):
        return 2.0 * self.omega * math.sin(self.kb)

    def energy(self, g, convention=EnergyConvention.GROUND_STATE):
        c, s = math.cos(self.kb), math.sin(self.kb)
        root = math.hypot(g - c, s)
        if _convention(convention) is EnergyConvention.GAP:
            return 4.0 * self.omega * root
        e = -2.0 * self.omega * root
        if self.include_shift:
            e -= 2.0 * self.omega * g
        return e

    def cost_rate(self, g, gdot):
        c, s = math.cos(self.kb), math.sin(self.kb)
        # 1 - 2 g cos(kb) + g^2 written as a sum of squares
        return abs(gdot * s) / ((g - c) ** 2 + s * s)

    def angle(self, g):
        return _mixing_angle(self.h_z(g), self.h_x)

    def bures(self, g_ref, g):
        return _angle_distance(self.angle(g) - self.angle(g_ref))

    def to_dict(self):
        return {"kind": self.kind, "N": self.N, "n": self.n, "b": self.b,
                "include_shift": self.include_shift, "omega": self.omega}


@dataclass(frozen=True)
class TFIMAggregate:
    """Whole Ising chain: sum over the N/2 positive momenta.

    With ``include_shift`` every mode carries its own ``-2 omega g``;
    ``single_shift`` replaces that with one shift for the whole chain.
    """

    N: int
    b: float = 1.0
    include_shift: bool = True
    single_shift: bool = False
    omega: float = 1.0
    kind = "tfim_aggregate"
    g_c = 1.0
    _kb: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise DomainError(f"N must be even and >= 2, got {self.N}")
        if not self.b > 0:
            raise DomainError(f"lattice spacing b must be positive, got {self.b}")
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        n = np.arange(1, self.N // 2 + 1)
        object.__setattr__(self, "_kb", (2 * n - 1) * np.pi / self.N)

    @property
    def k(self):
        return self._kb / self.b

    def modes(self):
        return [TFIMMode(self.N, n, self.b, self.include_shift, self.omega)
                for n in range(1, self.N // 2 + 1)]

    def energy(self, g, convention=EnergyConvention.GROUND_STATE):
        c, s = np.cos(self._kb), np.sin(self._kb)
        roots = np.hypot(g - c, s)
        if _convention(convention) is EnergyConvention.GAP:
            return float(4.0 * self.omega * roots.sum())
        e = float(-2.0 * self.omega * roots.sum())
        if self.include_shift:
            n_shifts = 1 if self.single_shift else self.N // 2
            e -= n_shifts * 2.0 * self.omega * g
        return e

    def cost_rate(self, g, gdot):
        c, s = np.cos(self._kb), np.sin(self._kb)
        return float(np.sum(np.abs(gdot * s) / ((g - c) ** 2 + s * s)))

    def angles(self, g):
        hz = 2.0 * self.omega * (g - np.cos(self._kb))
        hx = 2.0 * self.omega * np.sin(self._kb)
        r = np.hypot(hz, hx)
        with np.errstate(divide="ignore", invalid="ignore"):
            num = np.where(hz > 0, -hx * hx / (hz + r), hz - r)
        return np.arctan(num / hx)

    def overlap(self, g_ref, g):
        """|<gs(g_ref)|gs(g)>| as the product of per-mode overlaps."""
        return float(np.abs(np.prod(np.cos(self.angles(g) - self.angles(g_ref)))))

    def bures(self, g_ref, g):
        d = self.angles(g) - self.angles(g_ref)
        # 1 - prod cos^2 via log1p/expm1 keeps small angles accurate
        one_minus_p2 = -math.expm1(float(np.sum(np.log1p(-np.sin(d) ** 2))))
        p = float(np.abs(np.prod(np.cos(d))))
        return math.atan2(math.sqrt(max(one_minus_p2, 0.0)), p)

    def to_dict(self):
        return {"kind": self.kind, "N": self.N, "b": self.b,
                "include_shift": self.include_shift,
                "single_shift": self.single_shift, "omega": self.omega}


def lmg_effective_frequency(omega: float, g: float) -> float:
    """Effective oscillator frequency ``omega*sqrt(1 - g^2)`` for 0 <= g <= 1."""
    if not 0.0 <= g <= 1.0:
        raise DomainError(f"effective LMG model valid for 0 <= g <= 1, got g={g}")
    return omega * math.sqrt((1.0 - g) * (1.0 + g))


@dataclass(frozen=True)
class LMGEffective:
    """Thermodynamic-limit LMG model as a single effective oscillator."""

    omega: float = 1.0
    kind = "lmg"
    g_c = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")

    def frequency(self, g):
        return lmg_effective_frequency(self.omega, g)

    def energy(self, g, convention=EnergyConvention.GROUND_STATE):
        w = self.frequency(g)
        if _convention(convention) is EnergyConvention.GAP:
            return w
        return 0.5 * w

    def cost_rate(self, g, gdot):
        if not 0.0 <= g <= 1.0:
            raise DomainError(f"effective LMG model valid for 0 <= g <= 1, got g={g}")
        if g == 1.0:
            raise InfiniteRateError("LMG cost rate diverges at g=1")
        # |d omega_t/dt| / (sqrt(8) omega_t) with omega_t' = -omega g gdot / sqrt(1-g^2)
        return abs(g * gdot) / (SQRT8 * (1.0 - g) * (1.0 + g))

    def bures(self, g_ref, g):
        for x in (g_ref, g):
            if not 0.0 <= x < 1.0:
                raise DomainError(f"LMG Bures angle needs 0 <= g < 1, got {x}")
        a, b = self.frequency(g_ref), self.frequency(g)
        sa, sb = math.sqrt(a), math.sqrt(b)
        # cos^2 L = 2 sqrt(ab)/(a+b), sin^2 L = (sqrt a - sqrt b)^2/(a+b)
        return math.atan2(abs(a - b) / (sa + sb), math.sqrt(2.0 * sa * sb))

    def to_dict(self):
        return {"kind": self.kind, "omega": self.omega}


@dataclass(frozen=True)
class Synthetic:
    """Generic critical model ``energy = |g|^{z_nu}``, ``cost = z_nu |gdot/g|``.

    The critical point is at ``g = 0`` and the Bures denominator of the speed
    is fixed to one.
    """

    z_nu: float
    kind = "synthetic"
    g_c = 0.0
    fixed_denominator = True

    def __post_init__(self):
        if not self.z_nu > 0:
            raise DomainError(f"z_nu must be positive, got {self.z_nu}")

    def energy(self, g, convention=EnergyConvention.GROUND_STATE):
        return abs(g) ** self.z_nu

    def cost_rate(self, g, gdot):
        if g == 0.0:
            raise InfiniteRateError("synthetic cost rate diverges at g=0")
        return self.z_nu * abs(gdot) / abs(g)

    def bures(self, g_ref, g):
        raise DomainError("synthetic model has no Bures angle (denominator fixed to 1)")

    def to_dict(self):
        return {"kind": self.kind, "z_nu": self.z_nu}


MODEL_TYPES = {cls.kind: cls for cls in (LandauZener, TFIMMode, TFIMAggregate, LMGEffective, Synthetic)}


def ground_energy(model, convention, g):
    return model.energy(g, convention)


def cd_cost_rate(model, g, gdot):
    return model.cost_rate(g, gdot)


def bures_angle(model, g_ref, g):
    """Bures angle ``arccos|<gs(g_ref)|gs(g)>|`` in [0, pi/2]."""
    return model.bures(g_ref, g)


def tfim_mode_angle(model: TFIMMode, g: float) -> float:
    return model.angle(g)


def lz_ground_state(delta: float, g: float) -> TwoLevelState:
    """Ground state of ``delta*sigma_x + g*sigma_z`` with real, non-negative first amplitude."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    e = math.hypot(delta, g)
    # (g + e) a + delta b = 0; avoid cancellation in g + e for g < 0
    if g >= 0:
        a, b = delta, -(g + e)
    else:
        a, b = 1.0, -delta / (e - g)
    nrm = math.hypot(a, b)
    return TwoLevelState(complex(a / nrm), complex(b / nrm))


def lz_excited_state(delta: float, g: float) -> TwoLevelState:
    gs = lz_ground_state(delta, g)
    return TwoLevelState(-gs.c1.conjugate(), gs.c0.conjugate())
