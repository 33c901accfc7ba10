"""Numerical checks of kernel properties and of computed solutions.

Every check returns a ``VerifyReport``.  Residuals and boundary functionals
are measured with finite differences on the solution's evaluator, so they
are independent of how the solution was produced.
"""

from __future__ import annotations

from typing import Callable

import mpmath
import numpy as np

from .bounds import check_rf3_monotone, check_two_sided_bound, default_grid
from .errors import DomainError, ParameterError, StencilError, UnsupportedFamilyError
from .fraccalc import END_MARGIN, GridFunction, ScalarFn, evaluate, iterated_conf_diff
from .greens import Family, KernelSpec, OrderSet, cauchy3, lidstone_general, u3
from .report import VerifyReport
from .solver import RhsFn, ThreePointSpec, solve_linear, solve_threepoint

Spec = KernelSpec | ThreePointSpec

RESIDUAL_MARGIN = 0.05
RESIDUAL_POINTS = 19

# geometric sampling toward t = 0 for boundary limits
LIMIT_START = 0.05
LIMIT_RATIO = 0.5
LIMIT_COUNT = 12

FAULTS = ("sign-flip", "perturb", "lidstone-gamma")


def spec_name(spec: Spec) -> str:
    return spec.label if isinstance(spec, ThreePointSpec) else spec.family.value


def default_interior(n: int = RESIDUAL_POINTS, margin: float = RESIDUAL_MARGIN) -> np.ndarray:
    return np.linspace(margin, 1.0 - margin, n)


def nonlinear_forcing(rhs: RhsFn, x: GridFunction) -> ScalarFn:
    """Forcing ``t -> rhs(t, x(t))`` of the nonlinear problem, as the Picard solver sees it.

    The iteration feeds ``f`` the piecewise-linear interpolant of the mesh
    values, so the same interpolant is used here; the residual then measures
    how well the discrete fixed-point equation holds.
    """
    return lambda t: rhs(t, np.interp(t, x.mesh, x.values))


# ---------------------------------------------------------------- solutions

def verify_residual(x: ScalarFn, h: ScalarFn, spec: Spec, interior_mesh=None,
                    tol: float = 1e-4, margin: float = RESIDUAL_MARGIN) -> VerifyReport:
    """Sup over the mesh of ``|sign * D^{w_n}...D^{w_1} x - h|``."""
    mesh = default_interior(margin=margin) if interior_mesh is None else np.asarray(interior_mesh, float)
    if mesh.size == 0:
        raise ParameterError("empty residual mesh")
    if mesh.min() < margin or mesh.max() > 1.0 - margin:
        raise StencilError(f"residual points must lie in [{margin}, {1 - margin}]",
                           required_margin=margin)
    D = iterated_conf_diff(x, spec.operator_orders, mesh)
    r = np.abs(spec.sign * D - evaluate(h, mesh))
    i = int(np.argmax(r))
    return VerifyReport(f"residual[{spec_name(spec)}]", float(r[i]), tol, float(mesh[i]))


def limit_at_zero(fn: Callable[[np.ndarray], np.ndarray], start: float = LIMIT_START,
                  ratio: float = LIMIT_RATIO, count: int = LIMIT_COUNT) -> float:
    """Right limit at 0 of ``fn`` from samples at ``start * ratio**k``.

    Near 0 the functions met here are sums of powers of t, which become sums
    of geometric sequences along the samples; the Shanks transform removes
    those.  The estimate whose change between successive rows is smallest
    is returned (or the final one, if the table ends early on an exact fit).
    """
    t = start * ratio ** np.arange(count)
    vals = np.asarray(fn(t), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DomainError("non-finite samples while approaching t = 0")
    table = mpmath.shanks([mpmath.mpf(float(v)) for v in vals])
    if len(table) < count:
        # the transform hit an exact fit and stopped; its last estimate is it
        last = table[-1][1::2] if table else []
        return float(last[-1]) if last else float(vals[-1])
    best, best_err = float(vals[-1]), abs(vals[-1] - vals[-2])
    for i in range(1, len(table)):
        for j in range(1, len(table[i - 1]), 2):
            err = abs(table[i][j] - table[i - 1][j])
            if err < best_err:
                best, best_err = float(table[i][j]), float(err)
    return best


def _diff_at_zero(x, orders) -> float:
    return limit_at_zero(lambda t: iterated_conf_diff(x, orders, t))


def _diff_at(x, orders, t: float) -> float:
    side = "backward" if t > 1.0 - END_MARGIN else "central"
    return float(iterated_conf_diff(x, orders, t, side=side))


def boundary_functionals(x: ScalarFn, spec: Spec) -> dict[str, float]:
    """Values of every boundary functional of the family (zero for a solution)."""
    x0 = float(evaluate(x, 0.0))
    x1 = float(evaluate(x, 1.0))
    if isinstance(spec, ThreePointSpec):
        p = spec.params
        return {"x(0)": x0, "delta*x(eta)-x(1)": p.delta_3p * float(evaluate(x, p.eta_3p)) - x1}
    a, b, g, _ = spec.operator_orders + (None,) * (4 - len(spec.operator_orders))
    f = spec.family
    if f.second_order:
        bc = spec.bc
        return {
            "left": bc.gamma_bc * x0 - bc.delta_bc * _diff_at_zero(x, [a]),
            "right": bc.eta_bc * x1 + bc.zeta_bc * _diff_at(x, [a], 1.0),
        }
    if f is Family.RIGHTFOCAL3:
        return {
            "x(0)": x0,
            "D^a x(tau)": _diff_at(x, [a], spec.tau),
            "D^b D^a x(1)": _diff_at(x, [a, b], 1.0),
        }
    if f is Family.CANTILEVER4:
        return {
            "x(0)": x0,
            "D^a x(0)": _diff_at_zero(x, [a]),
            "D^b D^a x(1)": _diff_at(x, [a, b], 1.0),
            "D^g D^b D^a x(1)": _diff_at(x, [a, b, g], 1.0),
        }
    return {
        "x(0)": x0,
        "D^b D^a x(0)": _diff_at_zero(x, [a, b]),
        "x(1)": x1,
        "D^b D^a x(1)": _diff_at(x, [a, b], 1.0),
    }


def verify_bcs(x: ScalarFn, spec: Spec, tol: float = 1e-4) -> VerifyReport:
    values = boundary_functionals(x, spec)
    name = max(values, key=lambda k: abs(values[k]))
    return VerifyReport(f"boundary[{spec_name(spec)}]", abs(values[name]), tol, None,
                        {"worst": name, **values})


# ---------------------------------------------------------------- kernels

def _interior(grid):
    g = np.asarray(grid, dtype=float)
    return g[(g > 0.0) & (g < 1.0)]


def _worst(viol, T, S):
    idx = np.unravel_index(int(np.argmax(viol)), viol.shape)
    return float(viol[idx]), (float(T[idx]), float(S[idx]))


def check_positivity(spec: KernelSpec, grid=None, tol: float = 1e-12, kernel=None) -> VerifyReport:
    """Sign of the kernel on the grid, plus the column-peak bound where one is claimed.

    Magnitude is ``-min G`` over the grid interior (over ``(0, 1]^2`` for
    rightfocal3), combined with the largest excess of ``G(t, s)`` over
    ``G(1, s)`` (cantilever4) or ``G(tau, s)`` (rightfocal3).  The minimum
    itself is kept in ``details``.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    G = spec if kernel is None else kernel
    f = spec.family
    # the rightfocal3 claim covers t = 1 and s = 1 as well
    inner = grid[grid > 0.0] if f is Family.RIGHTFOCAL3 else _interior(grid)
    T, S = np.meshgrid(inner, inner, indexing="ij")
    viol = -np.asarray(G(T, S), dtype=float)
    details = {"min_G": float(-viol.max())}
    if f in (Family.CANTILEVER4, Family.RIGHTFOCAL3):
        Tf, Sf = np.meshgrid(grid, grid, indexing="ij")
        peak_t = 1.0 if f is Family.CANTILEVER4 else spec.tau
        excess = np.asarray(G(Tf, Sf), float) - np.asarray(G(np.full_like(Sf, peak_t), Sf), float)
        mag_e, loc_e = _worst(excess, Tf, Sf)
        details["max_excess"] = mag_e
        mag, loc = _worst(viol, T, S)
        if mag_e > mag:
            mag, loc = mag_e, loc_e
    else:
        mag, loc = _worst(viol, T, S)
    return VerifyReport(f"positivity[{f.value}]", mag, tol, loc, details)


def check_symmetry_lidstone(alpha: float, beta: float, grid=None, tol: float = 1e-12,
                            kernel=None) -> VerifyReport:
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    G = KernelSpec(Family.LIDSTONE4, OrderSet(alpha, beta)) if kernel is None else kernel
    T, S = np.meshgrid(grid, grid, indexing="ij")
    diff = np.abs(np.asarray(G(T, S), float) - np.asarray(G(S, T), float))
    mag, loc = _worst(diff, T, S)
    return VerifyReport("lidstone_symmetry", mag, tol, loc)


def lidstone_gamma_fault(alpha: float, beta: float, gamma: float):
    """General-gamma Lidstone reconstruction, mirrored across the diagonal as the
    symmetric kernel would be; it is symmetric only when ``gamma == alpha``."""
    return lambda t, s: lidstone_general(t, s, alpha, beta, gamma)


def _classical(family: Family):
    def conj(t, s):
        return np.where(t <= s, t * (1 - s), s * (1 - t))

    def rfoc(t, s):
        return np.minimum(t, s)

    def cant(t, s):
        return np.where(t <= s, t ** 2 * s / 2 - t ** 3 / 6, s ** 2 * t / 2 - s ** 3 / 6)

    def lid(t, s):
        lo, hi = np.minimum(t, s), np.maximum(t, s)
        return lo * (1 - hi) * (2 * hi - hi ** 2 - lo ** 2) / 6

    table = {Family.CONJUGATE2: conj, Family.RIGHTFOCAL2: rfoc,
             Family.CANTILEVER4: cant, Family.LIDSTONE4: lid}
    if family not in table:
        raise UnsupportedFamilyError(f"no textbook kernel recorded for {family.value}")
    return table[family]


def check_classical_reduction(spec: KernelSpec, grid=None, tol: float = 1e-12,
                              kernel=None) -> VerifyReport:
    """Compare an all-orders-one kernel with its textbook integer-order form."""
    if not spec.orders.all_one:
        raise ParameterError("classical reduction needs every order equal to 1")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    G = spec if kernel is None else kernel
    T, S = np.meshgrid(grid, grid, indexing="ij")
    diff = np.abs(np.asarray(G(T, S), float) - _classical(spec.family)(T, S))
    mag, loc = _worst(diff, T, S)
    return VerifyReport(f"classical[{spec.family.value}]", mag, tol, loc)


def check_seams(spec: KernelSpec, n: int = 101, tol: float = 1e-12) -> VerifyReport:
    """Both branch formulas agree on the diagonal (and at ``s = tau`` for rightfocal3)."""
    s = np.linspace(0.0, 1.0, n)
    up, lo = spec.branches(s, s)
    gap = np.abs(np.asarray(up, float) - np.asarray(lo, float))
    locs = [(float(v), float(v)) for v in s]
    if spec.family is Family.RIGHTFOCAL3:
        # across s = tau only the t >= tau branches change formula
        o, tau = spec.orders, spec.tau
        t = s[s >= tau]
        early = cauchy3(0.0, tau, o.alpha, o.beta)
        late = u3(t, tau, o.alpha, o.beta) + cauchy3(t, tau, o.alpha, o.beta)
        gap = np.concatenate([gap, np.abs(late - early)])
        locs += [(float(v), tau) for v in t]
    i = int(np.argmax(gap))
    return VerifyReport(f"seams[{spec.family.value}]", max(float(gap[i]), 0.0), tol, locs[i])


# ---------------------------------------------------------------- suite

def _kernel_for(spec: KernelSpec, fault: str | None):
    if fault == "sign-flip":
        return lambda t, s: -np.asarray(spec(t, s))
    if fault == "lidstone-gamma":
        if spec.family is not Family.LIDSTONE4:
            raise UnsupportedFamilyError("the gamma fault applies to lidstone4 only")
        o = spec.orders
        gamma = o.gamma if o.gamma != o.alpha else min(1.0, o.alpha + 0.25)
        if gamma == o.alpha:
            gamma = o.alpha - 0.25
        return lidstone_gamma_fault(o.alpha, o.beta, gamma)
    return None


def run_suite(spec: Spec, h: ScalarFn | None = None, tol: float = 1e-4,
              grid=None, fault: str | None = None) -> list[VerifyReport]:
    """Every applicable check for one family.

    ``fault`` injects a deliberate error so that the suite's power can be
    exercised: ``sign-flip`` negates the kernel, ``perturb`` scales the
    computed solution by 1.01, ``lidstone-gamma`` swaps in the general-gamma
    Lidstone reconstruction with ``gamma != alpha``.
    """
    if fault is not None and fault not in FAULTS:
        raise ParameterError(f"unknown fault {fault!r}; choose from {', '.join(FAULTS)}")
    h = (lambda s: np.ones_like(s)) if h is None else h
    reports: list[VerifyReport] = []
    if isinstance(spec, ThreePointSpec):
        if fault not in (None, "perturb"):
            raise UnsupportedFamilyError(f"fault {fault!r} needs a kernel family")
        x = solve_threepoint(h, spec.alpha, spec.beta, spec.params, mesh=[0.0, 1.0])
    else:
        kernel = _kernel_for(spec, fault)
        f = spec.family
        if spec.orders.all_one and f in (Family.CONJUGATE2, Family.RIGHTFOCAL2,
                                         Family.CANTILEVER4, Family.LIDSTONE4):
            reports.append(check_classical_reduction(spec, grid, kernel=kernel))
        if f.second_order or f is Family.RIGHTFOCAL3:
            reports.append(check_two_sided_bound(spec, grid, kernel=kernel))
        if f is Family.RIGHTFOCAL3:
            reports.append(check_rf3_monotone(spec, grid, kernel=kernel))
        reports.append(check_positivity(spec, grid, kernel=kernel))
        if f is Family.LIDSTONE4:
            o = spec.orders
            reports.append(check_symmetry_lidstone(o.alpha, o.beta, grid, kernel=kernel))
        if kernel is None:
            reports.append(check_seams(spec))
        x = solve_linear(spec, h, mesh=[0.0, 1.0], kernel=kernel)
    if fault == "perturb":
        inner = x
        x = lambda t: 1.01 * evaluate(inner, t)  # noqa: E731
    reports.append(verify_residual(x, h, spec, tol=tol))
    reports.append(verify_bcs(x, spec, tol=tol))
    return reports


__all__ = [
    "FAULTS", "boundary_functionals", "check_classical_reduction", "check_positivity",
    "check_seams", "check_symmetry_lidstone", "default_interior",
    "limit_at_zero", "lidstone_gamma_fault", "nonlinear_forcing", "run_suite",
    "spec_name", "verify_bcs", "verify_residual",
]
