"""Linear and nonlinear solves through the Green's-kernel integral operator,
the explicit three-point formula, and a kernel-free cascade oracle."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DivergenceError, ParameterError
from .fraccalc import (
    DEFAULT_RULE,
    GridFunction,
    QuadratureRule,
    ScalarFn,
    as_real,
    check_order,
    evaluate,
    weighted_rule,
)
from .greens import Family, KernelSpec

log = logging.getLogger(__name__)

DEFAULT_MESH_SIZE = 257
DIVERGENCE_LIMIT = 1e6
_CHUNK = 1024


def default_mesh(n: int = DEFAULT_MESH_SIZE) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


def _check_mesh(mesh) -> np.ndarray:
    mesh = np.atleast_1d(np.asarray(mesh, dtype=float))
    if mesh.ndim != 1 or np.any(mesh < 0.0) or np.any(mesh > 1.0):
        raise ParameterError("mesh points must lie in [0, 1]")
    return mesh


# ---------------------------------------------------------------- linear solves

def apply_kernel(spec: KernelSpec, F: ScalarFn, t, rule: QuadratureRule = DEFAULT_RULE,
                 kernel=None) -> np.ndarray:
    """``int_0^1 G(t,s) F(s) s**(w-1) ds`` at every point of ``t``.

    The s-range is split at ``t`` and at the kernel's seams so each piece
    sees a single smooth branch of the kernel.
    """
    G = spec if kernel is None else kernel
    w = spec.weight_order
    t = as_real(t)
    flat = t.ravel()
    out = np.empty_like(flat)
    fixed = [0.0, *spec.seams, 1.0]
    for lo in range(0, flat.size, _CHUNK):
        tc = flat[lo:lo + _CHUNK]
        cols = [np.full_like(tc, v) for v in fixed] + [tc]
        edges = np.sort(np.stack(cols, axis=-1), axis=-1)
        s, W = weighted_rule(w, edges[:, :-1], edges[:, 1:], rule)
        vals = as_real(G(tc[:, None, None], s)) * evaluate(F, s)
        out[lo:lo + _CHUNK] = np.einsum("ijk,ijk->i", vals, W)
    return out.reshape(t.shape)


def solve_linear(spec: KernelSpec, h: ScalarFn, mesh=None, rule: QuadratureRule = DEFAULT_RULE,
                 kernel=None) -> GridFunction:
    """Solution of the family's linear problem with forcing ``h``.

    The returned grid function evaluates the integral representation off
    the mesh as well.
    """
    mesh = default_mesh() if mesh is None else _check_mesh(mesh)

    def x(t):
        return apply_kernel(spec, h, t, rule, kernel)

    return GridFunction(mesh, x(mesh), x)


@dataclass(frozen=True)
class ThreePointParams:
    delta_3p: float
    eta_3p: float

    def check(self, alpha: float) -> None:
        if not (0.0 < self.eta_3p < 1.0):
            raise ParameterError(f"eta_3p={self.eta_3p} must lie in (0, 1)")
        q = self.delta_3p * self.eta_3p ** alpha
        if not (0.0 <= q < 1.0):
            raise ParameterError(f"delta_3p * eta_3p**alpha = {q} must lie in [0, 1)")


@dataclass(frozen=True)
class ThreePointSpec:
    """``-D^beta D^alpha x = h`` with ``x(0) = 0`` and ``delta x(eta) = x(1)``."""

    alpha: float
    beta: float
    params: ThreePointParams

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_order(self.alpha, "alpha"))
        object.__setattr__(self, "beta", check_order(self.beta, "beta"))
        self.params.check(self.alpha)

    label = "threepoint"
    sign = -1.0

    @property
    def operator_orders(self) -> tuple[float, float]:
        return (self.alpha, self.beta)


def solve_threepoint(h: ScalarFn, alpha: float, beta: float, p: ThreePointParams,
                     mesh=None, rule: QuadratureRule = DEFAULT_RULE) -> GridFunction:
    spec = ThreePointSpec(alpha, beta, p)
    a, b = spec.alpha, spec.beta
    dl, eta = p.delta_3p, p.eta_3p
    mesh = default_mesh() if mesh is None else _check_mesh(mesh)
    denom = a * (1.0 - dl * eta ** a)

    def moment(top, upper):
        s, W = weighted_rule(b, 0.0, upper, rule)
        return float(W @ ((top - s ** a) * evaluate(h, s)))

    through_eta = moment(eta ** a, eta)
    through_one = moment(1.0, 1.0)

    def x(t):
        t = as_real(t)
        s, W = weighted_rule(b, np.zeros_like(t), t, rule)
        ta = t ** a
        head = np.sum(W * (ta[..., None] - s ** a) * evaluate(h, s), axis=-1)
        return -head / a - dl * ta * through_eta / denom + ta * through_one / denom

    return GridFunction(mesh, x(mesh), x)


# ---------------------------------------------------------------- Picard iteration

@dataclass(frozen=True)
class RhsFn:
    """Right-hand side ``lambda_scale * a(t) * f(t, x)``."""

    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    lambda_scale: float = 1.0
    weight_fn: ScalarFn | None = None

    def __post_init__(self):
        if not self.lambda_scale >= 0:
            raise ParameterError("lambda_scale must be nonnegative")

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        val = np.asarray(self.f(t, x), dtype=float) * self.lambda_scale
        if self.weight_fn is not None:
            val = val * evaluate(self.weight_fn, t)
        return np.broadcast_to(val, t.shape)


@dataclass
class SolveReport:
    solution: GridFunction
    iterations: int
    residual_sup: float
    converged: bool
    history: list[float] = field(default_factory=list)


class _MeshOperator:
    """Kernel operator acting on piecewise-linear data over a fixed mesh.

    Quadrature pieces break at every mesh node so that linear interpolation
    kinks never fall inside a Gauss panel.
    """

    def __init__(self, spec: KernelSpec, mesh: np.ndarray, rule: QuadratureRule, kernel=None):
        self.spec = spec
        self.G = spec if kernel is None else kernel
        self.mesh = mesh
        self.rule = rule
        self._fixed = np.union1d(np.union1d(mesh, [0.0, 1.0]), spec.seams)
        self._rows = [self._row(t) for t in mesh]

    def _row(self, t: float):
        w = self.spec.weight_order
        edges = np.union1d(self._fixed, [t])
        lo, hi = edges[:-1], edges[1:]
        ulo, uhi = lo ** w, hi ** w
        # grade only pieces whose left end sits close to the weight singularity at 0
        near = ulo < (uhi - ulo)
        nodes, weights = [], []
        for mask, graded in ((near, True), (~near, False)):
            if np.any(mask):
                s, W = weighted_rule(w, lo[mask], hi[mask], self.rule, graded=graded)
                nodes.append(s.ravel())
                weights.append(W.ravel())
        s = np.concatenate(nodes)
        W = np.concatenate(weights) * as_real(self.G(t, s))
        return s, W

    def apply(self, F: ScalarFn, rows=None) -> np.ndarray:
        rows = self._rows if rows is None else rows
        return np.array([W @ evaluate(F, s) for s, W in rows])

    def evaluate_at(self, F: ScalarFn, t) -> np.ndarray:
        t = as_real(t)
        vals = self.apply(F, [self._row(v) for v in t.ravel()])
        return vals.reshape(t.shape)


def solve_nonlinear_picard(spec: KernelSpec, rhs: RhsFn, tol: float = 1e-10, max_iter: int = 100,
                           mesh=None, rule: QuadratureRule = DEFAULT_RULE,
                           kernel=None) -> SolveReport:
    """Plain Picard iteration ``x <- T x`` from ``x = 0``.

    ``T x(t) = int G(t,s) rhs(s, x(s)) s**(w-1) ds`` with ``x`` interpolated
    linearly between mesh values.  Raises ``DivergenceError`` once the
    iterate's sup-norm exceeds ``DIVERGENCE_LIMIT``.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    mesh = default_mesh() if mesh is None else np.unique(_check_mesh(mesh))
    op = _MeshOperator(spec, mesh, rule, kernel)

    def forcing(values):
        return lambda s: rhs(s, np.interp(s, mesh, values))

    x = np.zeros_like(mesh)
    history: list[float] = []
    F = forcing(x)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new = op.apply(F)
        if not np.all(np.isfinite(new)) or np.max(np.abs(new)) > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"Picard iterate exceeded {DIVERGENCE_LIMIT:g} after {it} iterations", it)
        change = float(np.max(np.abs(new - x)))
        history.append(change)
        log.debug("picard iteration %d: sup change %.3e", it, change)
        x = new
        if change <= tol:
            converged = True
            break
        F = forcing(x)

    # x = T(F) exactly, so the evaluator reproduces mesh values and extends off-mesh
    last_F = F
    solution = GridFunction(mesh, x, lambda t: op.evaluate_at(last_F, t))
    return SolveReport(solution, it, history[-1], converged, history)


# ---------------------------------------------------------------- cascade oracle

@dataclass
class _Cascade:
    """Cumulative conformable integrals on a fixed panel grid.

    Panels are geometric toward 0 (ratio 1/2 down to ``floor``) then
    uniform, with every requested point inserted as a panel edge so values
    there are exact panel sums.  Within a panel the integrand is replaced by
    its Gauss-node interpolant and integrated with a spectral matrix.
    """

    points: np.ndarray
    n: int = 16
    floor_exp: int = 100
    uniform: int = 64

    def __post_init__(self):
        geo = 0.5 ** np.arange(self.floor_exp, 2, -1, dtype=float)
        uni = np.linspace(0.125, 1.0, self.uniform * 7 // 8 + 1)
        edges = np.union1d(np.union1d(geo, uni), np.asarray(self.points, dtype=float))
        self.edges = edges[edges > 0]
        x, w = np.polynomial.legendre.leggauss(self.n)
        basis = np.linalg.inv(np.polynomial.legendre.legvander(x, self.n - 1))
        anti = np.polynomial.legendre.legint(basis, lbnd=-1, axis=0)
        cum = np.polynomial.legendre.legval(x, anti).T  # [i, j] = int_{-1}^{x_i} l_j
        lo, hi = self.edges[:-1, None], self.edges[1:, None]
        self.half = (hi - lo) / 2.0
        self.nodes = lo + self.half * (x + 1.0)
        self.w = w
        self.cum = cum
        self.floor = self.edges[0]

    def integrate(self, f_nodes: np.ndarray, order: float):
        """Return ``F(s) = int_0^s f(r) r**(order-1) dr`` at nodes and at edges."""
        g = f_nodes * self.nodes ** (order - 1.0)
        panel = self.half[:, 0] * (g @ self.w)
        # below the first edge f is taken constant: int_0^floor r**(order-1) = floor**order/order
        start = f_nodes[0, 0] * self.floor ** order / order
        at_edges = start + np.concatenate([[0.0], np.cumsum(panel)])
        inside = at_edges[:-1, None] + self.half * (g @ self.cum.T)
        return inside, at_edges

    def at(self, edge_values: np.ndarray, t) -> np.ndarray:
        # t = 0 reads the first edge, which sits at 2**-floor_exp
        idx = np.searchsorted(self.edges, np.maximum(np.asarray(t, dtype=float), self.floor))
        return edge_values[np.minimum(idx, len(self.edges) - 1)]

    def power(self, order: float):
        """Nodes and edge values of ``t**order / order`` (the integral of the weight)."""
        return self.nodes ** order / order, self.edges ** order / order


def oracle_direct(spec: KernelSpec | ThreePointSpec, h: ScalarFn, t) -> np.ndarray:
    """Solve the family's problem by integrating its first-order cascade.

    Each conformable derivative is undone by a cumulative weighted integral
    and the integration constants are fixed from the boundary conditions.
    The Green's kernel is never used.
    """
    t = np.asarray(t, dtype=float)
    extra = [1.0]
    if isinstance(spec, ThreePointSpec):
        extra.append(spec.params.eta_3p)
    elif spec.family is Family.RIGHTFOCAL3:
        extra.append(spec.tau)
    cas = _Cascade(np.union1d(t.ravel(), extra))
    hv = evaluate(h, cas.nodes)

    def I(values, order):  # noqa: E743
        return cas.integrate(values, order)

    def at(edges, where):
        return float(cas.at(edges, where))

    if isinstance(spec, ThreePointSpec):
        a, b, p = spec.alpha, spec.beta, spec.params
        H, _ = I(hv, b)
        J, Je = I(H, a)
        c1 = a * (at(Je, 1.0) - p.delta_3p * at(Je, p.eta_3p)) / (1.0 - p.delta_3p * p.eta_3p ** a)
        xn = c1 * cas.power(a)[1] - Je
        return cas.at(xn, t)

    o = spec.orders
    f = spec.family
    if f.second_order:
        a, b = o.alpha, o.beta
        g, dl, e, z = spec.bc.as_tuple()
        H, He = I(hv, b)
        J, Je = I(H, a)
        M = np.array([[g, -dl], [e, e / a + z]])
        rhs = np.array([0.0, e * at(Je, 1.0) + z * at(He, 1.0)])
        if abs(np.linalg.det(M)) < 1e-14:
            raise ParameterError("boundary system is singular")
        c0, c1 = np.linalg.solve(M, rhs)
        xe = c0 + c1 * cas.power(a)[1] - Je
    elif f is Family.RIGHTFOCAL3:
        a, b, g = o.alpha, o.beta, o.gamma
        Z, Ze = I(hv, g)
        Z, Ze = Z - at(Ze, 1.0), Ze - at(Ze, 1.0)
        Y, Ye = I(Z, b)
        Y, Ye = Y - at(Ye, spec.tau), Ye - at(Ye, spec.tau)
        _, xe = I(Y, a)
    elif f is Family.CANTILEVER4:
        a, b, g, d = o.alpha, o.beta, o.gamma, o.delta
        Z3, Z3e = I(hv, d)
        Z3 = Z3 - at(Z3e, 1.0)
        Z2, Z2e = I(Z3, g)
        Z2 = Z2 - at(Z2e, 1.0)
        Y, _ = I(Z2, b)
        _, xe = I(Y, a)
    else:
        a, b = o.alpha, o.beta
        Hn, _ = I(hv, b)
        Kn, Ke = I(Hn, a)
        pn, pe = cas.power(a)
        c3 = -at(Ke, 1.0) / at(pe, 1.0)
        Z2 = c3 * pn + Kn
        Yn, _ = I(Z2, b)
        Xn, Xe = I(Yn, a)
        c1 = -at(Xe, 1.0) / at(pe, 1.0)
        xe = c1 * pe + Xe
    return cas.at(xe, t)
