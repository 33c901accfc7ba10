"""Closed-form Green's functions and Cauchy functions on [0, 1].

All evaluators broadcast over numpy arrays ``t`` and ``s``.  On the
diagonal ``t == s`` the ``t <= s`` branch is used.  Boundary coefficients
of the second-order problem carry a ``_bc`` suffix so that they never
collide with the derivative orders ``gamma`` and ``delta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ParameterError, SingularPointError
from .fraccalc import as_real, check_order

_arr = as_real


def _out(x):
    return x if np.ndim(x) else x[()]


@dataclass(frozen=True)
class OrderSet:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, check_order(getattr(self, name), name))

    @property
    def all_one(self) -> bool:
        return self.alpha == self.beta == self.gamma == self.delta == 1.0


@dataclass(frozen=True)
class BcCoeffs:
    """Coefficients of ``g x(0) - d D^a x(0) = 0 = e x(1) + z D^a x(1)``."""

    gamma_bc: float
    delta_bc: float
    eta_bc: float
    zeta_bc: float

    def __post_init__(self):
        for name in ("gamma_bc", "delta_bc", "eta_bc", "zeta_bc"):
            v = float(getattr(self, name))
            if not v >= 0.0:
                raise ParameterError(f"{name}={v!r} must be nonnegative")
            object.__setattr__(self, name, v)

    def d(self, alpha: float) -> float:
        return self.eta_bc * self.delta_bc + self.gamma_bc * self.zeta_bc + self.gamma_bc * self.eta_bc / alpha

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.gamma_bc, self.delta_bc, self.eta_bc, self.zeta_bc)


CONJUGATE_BC = BcCoeffs(1.0, 0.0, 1.0, 0.0)
RIGHTFOCAL_BC = BcCoeffs(1.0, 0.0, 0.0, 1.0)


# ---------------------------------------------------------------- two derivatives

def g2_sl(t, s, alpha, bc: BcCoeffs):
    d = bc.d(alpha)
    if not d > 0:
        raise ParameterError(f"boundary constant d={d} must be positive")
    t, s = _arr(t), _arr(s)
    g, dl, e, z = bc.as_tuple()

    def left(x):
        return dl + g / alpha * x ** alpha

    def right(x):
        return z + e / alpha * (1.0 - x ** alpha)

    return _out(np.where(t <= s, left(t) * right(s), left(s) * right(t)) / d)


def g2_conjugate(t, s, alpha):
    """``min(t,s)**a (1 - max(t,s)**a) / a``: x(0) = x(1) = 0."""
    return g2_sl(t, s, alpha, CONJUGATE_BC)


def g2_rightfocal(t, s, alpha):
    """``min(t,s)**a / a``: x(0) = D^a x(1) = 0."""
    return g2_sl(t, s, alpha, RIGHTFOCAL_BC)


# ---------------------------------------------------------------- three derivatives

def u3(t, s, alpha, beta):
    t, s = _arr(t), _arr(s)
    a, b = alpha, beta
    return _out(((a + b) * t ** a * s ** b - a * t ** (a + b)) / (a * b * (a + b)))


def cauchy3(t, s, alpha, beta):
    t, s = _arr(t), _arr(s)
    a, b = alpha, beta
    return _out((a * t ** a * (t ** b - s ** b) + b * s ** b * (s ** a - t ** a)) / (a * b * (a + b)))


def check_tau(tau) -> float:
    if tau is None or not (0.0 < float(tau) < 1.0):
        raise ParameterError(f"tau={tau!r} must lie strictly inside (0, 1)")
    return float(tau)


def g3_rightfocal(t, s, alpha, beta, tau):
    tau = check_tau(tau)
    t, s = _arr(t), _arr(s)
    u_ts = u3(t, s, alpha, beta)
    x_0s = cauchy3(0.0, s, alpha, beta)
    u_tt = u3(t, tau, alpha, beta)
    x_ts = cauchy3(t, s, alpha, beta)
    early = np.where(t <= s, u_ts, x_0s)
    late = np.where(t <= s, u_tt, u_tt + x_ts)
    return _out(np.where(s <= tau, early, late))


# ---------------------------------------------------------------- four derivatives

def g4_cantilever(t, s, alpha, beta, gamma):
    t, s = _arr(t), _arr(s)
    a, b, g = alpha, beta, gamma
    upper = t ** (a + b) / g * (s ** g / (b * (a + b)) - t ** g / ((b + g) * (a + b + g)))
    lower = s ** (b + g) / a * (t ** a / (b * (b + g)) - s ** a / ((a + b) * (a + b + g)))
    return _out(np.where(t <= s, upper, lower))


def g4_cantilever_dt(t, s, alpha, beta, gamma):
    """Partial derivative of the cantilever kernel in ``t``."""
    t, s = _arr(t), _arr(s)
    if alpha < 1.0 and np.any(t == 0.0):
        raise SingularPointError("t**(alpha-1) is unbounded at t=0 for alpha < 1")
    a, b, g = alpha, beta, gamma
    upper = t ** (a + b - 1) / (b * g * (b + g)) * (g * s ** g + b * (s ** g - t ** g))
    lower = s ** (b + g) * t ** (a - 1) / (b * (b + g))
    return _out(np.where(t <= s, upper, lower))


def cauchy4(t, s, alpha, beta, gamma):
    """Closed form of the double integral defining the fourth-order Cauchy function.

    Inner integral over xi in [s, tau], outer over tau in [s, t]; both are
    elementary because every factor is a power.
    """
    t, s = _arr(t), _arr(s)
    a, b, g = alpha, beta, gamma
    total = (
        (t ** (a + b + g) - s ** (a + b + g)) / ((b + g) * (a + b + g))
        - s ** (b + g) * (t ** a - s ** a) / (a * (b + g))
        - s ** g * (t ** (a + b) - s ** (a + b)) / (b * (a + b))
        + s ** (b + g) * (t ** a - s ** a) / (a * b)
    )
    return _out(total / g)


def lidstone_coeffs(s, alpha, beta, gamma):
    """Coefficients ``(b(s), d(s))`` of ``u(t,s) = b t^a + d t^(a+b+g)``."""
    s = _arr(s)
    a, b, g = alpha, beta, gamma
    dd = (s ** g - 1.0) / (g * (b + g) * (a + b + g))
    bb = (
        s ** (a + b + g) / (a * (a + b) * (a + b + g))
        - s ** (b + g) / (a * b * (b + g))
        + s ** g / g * (1.0 / (b * (a + b)) - 1.0 / ((b + g) * (a + b + g)))
    )
    return _out(bb), _out(dd)


def lidstone_general(t, s, alpha, beta, gamma):
    """Lidstone kernel rebuilt from the coefficients, for any third order ``gamma``."""
    t, s = _arr(t), _arr(s)
    bb, dd = lidstone_coeffs(s, alpha, beta, gamma)
    u = bb * t ** alpha + dd * t ** (alpha + beta + gamma)
    return _out(np.where(t <= s, u, u + cauchy4(t, s, alpha, beta, gamma)))


def u_lidstone(t, s, alpha, beta):
    t, s = _arr(t), _arr(s)
    a, b = alpha, beta
    scale = t ** a / (a * b * (a + b) * (2 * a + b))
    return _out(scale * (2 * a * s ** a * (1 - s ** b) - b * (1 - s ** a) * (t ** (a + b) + s ** (a + b))))


def g4_lidstone(t, s, alpha, beta):
    t, s = _arr(t), _arr(s)
    return _out(np.where(t <= s, u_lidstone(t, s, alpha, beta), u_lidstone(s, t, alpha, beta)))


# ---------------------------------------------------------------- family selector

class Family(str, Enum):
    SL2 = "sl2"
    CONJUGATE2 = "conjugate2"
    RIGHTFOCAL2 = "rightfocal2"
    RIGHTFOCAL3 = "rightfocal3"
    CANTILEVER4 = "cantilever4"
    LIDSTONE4 = "lidstone4"

    @property
    def second_order(self) -> bool:
        return self in (Family.SL2, Family.CONJUGATE2, Family.RIGHTFOCAL2)


@dataclass(frozen=True)
class KernelSpec:
    """One kernel family together with its parameters.

    ``sign * D^{w_n} ... D^{w_1} x = h`` is the differential equation the
    kernel inverts, where ``operator_orders`` lists ``w_1, ..., w_n``
    (applied innermost first).  Solutions are ``int G(t,s) h(s) s**(w_n - 1) ds``.
    """

    family: Family
    orders: OrderSet = field(default_factory=OrderSet)
    tau: float | None = None
    bc: BcCoeffs | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.RIGHTFOCAL3:
            object.__setattr__(self, "tau", check_tau(self.tau))
        if self.family is Family.SL2:
            if self.bc is None:
                raise ParameterError("the sl2 family needs boundary coefficients")
            d = self.bc.d(self.orders.alpha)
            if not d > 0:
                raise ParameterError(f"boundary constant d={d} must be positive")
        if self.family is Family.CONJUGATE2:
            object.__setattr__(self, "bc", CONJUGATE_BC)
        if self.family is Family.RIGHTFOCAL2:
            object.__setattr__(self, "bc", RIGHTFOCAL_BC)

    @property
    def operator_orders(self) -> tuple[float, ...]:
        o = self.orders
        if self.family.second_order:
            return (o.alpha, o.beta)
        if self.family is Family.RIGHTFOCAL3:
            return (o.alpha, o.beta, o.gamma)
        if self.family is Family.CANTILEVER4:
            return (o.alpha, o.beta, o.gamma, o.delta)
        return (o.alpha, o.beta, o.alpha, o.beta)

    @property
    def weight_order(self) -> float:
        return self.operator_orders[-1]

    @property
    def sign(self) -> float:
        return -1.0 if self.family.second_order else 1.0

    @property
    def seams(self) -> tuple[float, ...]:
        return (self.tau,) if self.family is Family.RIGHTFOCAL3 else ()

    def __call__(self, t, s):
        o = self.orders
        f = self.family
        if f is Family.SL2:
            return g2_sl(t, s, o.alpha, self.bc)
        if f is Family.CONJUGATE2:
            return g2_conjugate(t, s, o.alpha)
        if f is Family.RIGHTFOCAL2:
            return g2_rightfocal(t, s, o.alpha)
        if f is Family.RIGHTFOCAL3:
            return g3_rightfocal(t, s, o.alpha, o.beta, self.tau)
        if f is Family.CANTILEVER4:
            return g4_cantilever(t, s, o.alpha, o.beta, o.gamma)
        return g4_lidstone(t, s, o.alpha, o.beta)

    def branches(self, t, s) -> tuple[np.ndarray, np.ndarray]:
        """Both one-sided formulas at ``(t, s)``, for seam-continuity checks.

        Returns the value produced by the ``t <= s`` formula and by the
        ``s <= t`` formula, evaluated at the same point.
        """
        t, s = _arr(t), _arr(s)
        o = self.orders
        a, b, g = o.alpha, o.beta, o.gamma
        f = self.family
        if f.second_order:
            bc = self.bc
            dd = bc.d(a)
            left = lambda x: bc.delta_bc + bc.gamma_bc / a * x ** a  # noqa: E731
            right = lambda x: bc.zeta_bc + bc.eta_bc / a * (1 - x ** a)  # noqa: E731
            return left(t) * right(s) / dd, left(s) * right(t) / dd
        if f is Family.RIGHTFOCAL3:
            tau = self.tau
            early = (u3(t, s, a, b), cauchy3(0.0, s, a, b))
            late = (u3(t, tau, a, b), u3(t, tau, a, b) + cauchy3(t, s, a, b))
            pick = s <= tau
            return np.where(pick, early[0], late[0]), np.where(pick, early[1], late[1])
        if f is Family.CANTILEVER4:
            up = t ** (a + b) / g * (s ** g / (b * (a + b)) - t ** g / ((b + g) * (a + b + g)))
            lo = s ** (b + g) / a * (t ** a / (b * (b + g)) - s ** a / ((a + b) * (a + b + g)))
            return up, lo
        return u_lidstone(t, s, a, b), u_lidstone(s, t, a, b)
