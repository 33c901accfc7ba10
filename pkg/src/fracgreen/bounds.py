"""Lower envelopes, the third-order positivity threshold and grid scans of the
two-sided kernel bounds."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, UnsupportedFamilyError
from .greens import BcCoeffs, Family, KernelSpec, check_tau
from .report import VerifyReport


def default_grid(n: int = 101) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


def envelope_g2(t, alpha, bc: BcCoeffs):
    g, dl, e, z = bc.as_tuple()
    den1 = alpha * dl + g
    den2 = alpha * z + e
    if den1 == 0 or den2 == 0:
        raise ParameterError("envelope undefined: a boundary ratio has zero denominator")
    t = np.asarray(t, dtype=float)
    ta = t ** alpha
    out = np.minimum((alpha * dl + g * ta) / den1, (alpha * z + e * (1.0 - ta)) / den2)
    return out if out.ndim else float(out)


def envelope_g3(t, alpha, beta, tau):
    tau = check_tau(tau)
    t = np.asarray(t, dtype=float)
    a, b = alpha, beta
    rise = t ** a * ((a + b) * tau ** b - a * t ** b) / (b * tau ** (a + b))
    out = np.minimum(rise, (1.0 - t) / (1.0 - tau))
    return out if out.ndim else float(out)


def g3_positivity_threshold(alpha, beta) -> float:
    """Smallest admissible tau for the third-order right-focal kernel to stay positive."""
    return (alpha / (alpha + beta)) ** (1.0 / beta)


def k_lidstone(s, alpha, beta):
    s = np.asarray(s, dtype=float)
    out = beta * s ** (alpha + beta) - (alpha + beta) * s ** beta + alpha
    return out if out.ndim else float(out)


def _worst(viol: np.ndarray, T: np.ndarray, S: np.ndarray):
    idx = np.unravel_index(int(np.argmax(viol)), viol.shape)
    return float(viol[idx]), (float(T[idx]), float(S[idx]))


def check_two_sided_bound(spec: KernelSpec, grid=None, tol: float = 1e-12,
                          kernel=None) -> VerifyReport:
    """Scan ``g(t) G(peak, s) <= G(t, s) <= G(peak, s)`` over ``grid x grid``.

    The peak is the diagonal ``G(s, s)`` for the second-order families and
    ``G(tau, s)`` for the third-order right-focal kernel.  For the latter the
    scan also requires ``G >= 0`` on ``(0, 1]^2``, the property that breaks
    first when tau drops below the positivity threshold.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    G = spec if kernel is None else kernel
    T, S = np.meshgrid(grid, grid, indexing="ij")
    Gts = np.asarray(G(T, S), dtype=float)
    a = spec.orders.alpha
    details = {}
    if spec.family.second_order:
        peak = np.asarray(G(S, S), dtype=float)
        env = envelope_g2(T, a, spec.bc)
        viol = np.maximum(env * peak - Gts, Gts - peak)
    elif spec.family is Family.RIGHTFOCAL3:
        peak = np.asarray(G(np.full_like(S, spec.tau), S), dtype=float)
        env = envelope_g3(T, a, spec.orders.beta, spec.tau)
        viol = np.maximum(env * peak - Gts, Gts - peak)
        inside = (T > 0) & (S > 0)
        neg = np.where(inside, -Gts, -np.inf)
        details["min_G"] = float(-neg.max())
        viol = np.maximum(viol, neg)
    else:
        raise UnsupportedFamilyError(
            f"no two-sided bound for family {spec.family.value}; use check_positivity")
    mag, loc = _worst(viol, T, S)
    return VerifyReport(f"two_sided_bound[{spec.family.value}]", mag, tol, loc, details)


def check_strict_lower_bound(spec: KernelSpec, points, margin: float = 1e-9,
                             kernel=None) -> VerifyReport:
    """Spot-check ``G(t,s) - g(t) G(s,s) > margin`` at interior points.

    The magnitude is ``margin - min gap``, so the check passes when every
    gap clears the margin.
    """
    if not spec.family.second_order:
        raise UnsupportedFamilyError("strict lower bound is stated for second-order kernels only")
    G = spec if kernel is None else kernel
    pts = np.asarray(points, dtype=float)
    t, s = pts[:, 0], pts[:, 1]
    gap = np.asarray(G(t, s)) - envelope_g2(t, spec.orders.alpha, spec.bc) * np.asarray(G(s, s))
    i = int(np.argmin(gap))
    mag = margin - float(gap[i])
    return VerifyReport("strict_lower_bound", mag, 0.0,
                        (float(t[i]), float(s[i])), {"min_gap": float(gap[i])})


def check_rf3_monotone(spec: KernelSpec, grid=None, tol: float = 1e-12,
                       kernel=None) -> VerifyReport:
    """Columns of the right-focal kernel rise on [0, tau] and fall on [tau, 1]."""
    if spec.family is not Family.RIGHTFOCAL3:
        raise UnsupportedFamilyError("monotonicity scan applies to rightfocal3 only")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    G = spec if kernel is None else kernel
    tt = np.union1d(grid, [spec.tau])
    T, S = np.meshgrid(tt, grid, indexing="ij")
    Gv = np.asarray(G(T, S), dtype=float)
    steps = np.diff(Gv, axis=0)
    before = (tt[1:] <= spec.tau)[:, None]
    viol = np.where(before, -steps, steps)
    mag, loc = _worst(viol, T[1:], S[1:])
    return VerifyReport("rf3_monotone_columns", mag, tol, loc)
