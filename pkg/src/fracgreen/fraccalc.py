"""Conformable derivative and integral primitives.

The conformable derivative of order ``alpha`` in (0, 1] is the local
operator ``D^alpha f(t) = t**(1 - alpha) * f'(t)``; its inverse is
integration against the weight ``s**(alpha - 1)``.  Everything here is a
pure function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericError, ParameterError, StencilError

ScalarFn = Callable[[np.ndarray], np.ndarray]

T_MIN = 1e-8
FD_STEP = 1e-5

# 4th-order stencils: (offsets, weights) for f' * h
CENTRAL = (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0)
BACKWARD = (
    np.array([0.0, -1.0, -2.0, -3.0, -4.0]),
    np.array([25.0, -48.0, 36.0, -16.0, 3.0]) / 12.0,
)
FORWARD = (-BACKWARD[0], -BACKWARD[1])

# relative step (fraction of t) per nesting depth for iterated derivatives
NESTED_REL_STEP = {1: 1e-3, 2: 2e-3, 3: 4e-3, 4: 6e-3}

# wide stencils for the expanded form: 2*WIDE_HALF + 1 points
WIDE_HALF = 4
WIDE_REL_STEP = 0.02
END_MARGIN = 0.01


def check_order(value: float, name: str = "alpha") -> float:
    value = float(value)
    if not (0.0 < value <= 1.0) or not np.isfinite(value):
        raise ParameterError(f"order {name}={value!r} must lie in (0, 1]")
    return value


def as_real(x) -> np.ndarray:
    """Array of ``x`` as float64, or kept as ``longdouble`` when it already is."""
    x = np.asarray(x)
    if x.dtype == np.longdouble:
        return x
    return x.astype(float, copy=False)


def evaluate(f: ScalarFn, t) -> np.ndarray:
    """Call ``f`` on an array and broadcast the result to ``t``'s shape.

    Callables returning a plain constant (``lambda s: 1.0``) are accepted.
    Extended-precision input stays extended when ``f`` supports it.
    """
    t = as_real(t)
    out = as_real(f(t))
    if out.shape != t.shape:
        out = np.broadcast_to(out, t.shape).copy()
    return out


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule graded geometrically toward the left end.

    Panels on the reference interval [0, 1] are ``[ratio**(k+1), ratio**k]``
    for ``k < n_layers`` plus a final ``[0, ratio**n_layers]``.  Each panel
    carries ``n_nodes`` Gauss points.
    """

    n_nodes: int = 10
    n_layers: int = 40
    ratio: float = 0.5

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ParameterError("quadrature rule needs at least one node")
        if self.n_layers < 0 or not (0.0 < self.ratio < 1.0):
            raise ParameterError("invalid grading for quadrature rule")

    def reference(self, graded: bool = True) -> tuple[np.ndarray, np.ndarray]:
        return _reference_rule(self.n_nodes, self.n_layers if graded else 0, self.ratio)


@lru_cache(maxsize=32)
def _reference_rule(n: int, layers: int, ratio: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.concatenate([[0.0], ratio ** np.arange(layers, -1, -1, dtype=float)])
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = (lo + (hi - lo) * (x + 1.0) / 2.0).ravel()
    weights = ((hi - lo) * w / 2.0).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


DEFAULT_RULE = QuadratureRule()


def weighted_rule(alpha: float, a, b, rule: QuadratureRule = DEFAULT_RULE,
                  graded: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``int_a^b h(s) s**(alpha-1) ds``.

    ``a`` and ``b`` may be arrays of equal shape; the returned arrays gain a
    trailing node axis.  The substitution ``u = s**alpha`` absorbs the weight,
    so the weights are plain Gauss weights on ``[a**alpha, b**alpha]``
    divided by ``alpha``.
    """
    a = as_real(a)
    b = as_real(b)
    lo = np.power(a, alpha)[..., None]
    hi = np.power(b, alpha)[..., None]
    r, w = rule.reference(graded)
    u = lo + (hi - lo) * r
    s = np.power(u, 1.0 / alpha)
    return s, (hi - lo) * w / alpha


def conf_diff_closed(f: ScalarFn, alpha: float, t: float,
                     fprime: ScalarFn | None = None) -> float:
    """``t**(1-alpha) f'(t)``; ``f'`` from ``fprime`` or a 4th-order stencil.

    At ``t == 0`` the right limit is reported as the value at ``T_MIN``.
    """
    alpha = check_order(alpha)
    t = float(t)
    if t < 0:
        raise DomainError(f"conformable derivative undefined at t={t} < 0")
    if t == 0.0:
        t = T_MIN
    if fprime is not None:
        d = float(evaluate(fprime, t))
    else:
        h = min(FD_STEP * max(1.0, t), t / 4.0)
        offsets, coef = BACKWARD if t + 2 * h > 1.0 else CENTRAL
        vals = evaluate(f, t + offsets * h)
        d = float(coef @ vals) / h
    if not np.isfinite(d):
        raise NumericError(f"non-finite derivative of f near t={t}")
    return t ** (1.0 - alpha) * d


def conf_diff_limit(f: ScalarFn, alpha: float, t: float, eps: float = 1e-6) -> float:
    """Symmetric quotient of the defining limit with the rescaling t*exp(eps*t**-alpha)."""
    alpha = check_order(alpha)
    if t <= 0:
        raise DomainError("the exponential rescaling needs t > 0")
    if eps == 0:
        raise ParameterError("eps must be nonzero")
    k = eps * t ** (-alpha)
    up, down = evaluate(f, np.array([t * np.exp(k), t * np.exp(-k)]))
    val = (up - down) / (2.0 * eps)
    if not np.isfinite(val):
        raise NumericError(f"non-finite difference quotient near t={t}")
    return float(val)


def conf_integral(h: ScalarFn, alpha: float, a: float, b: float,
                  rule: QuadratureRule = DEFAULT_RULE) -> float:
    """``int_a^b h(s) s**(alpha-1) ds`` for ``0 <= a <= b <= 1``."""
    alpha = check_order(alpha)
    if a > b:
        raise ParameterError(f"integration bounds reversed: a={a} > b={b}")
    if a < 0:
        raise DomainError("lower limit must be nonnegative")
    s, w = weighted_rule(alpha, a, b, rule)
    return float(w @ evaluate(h, s))


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function on a mesh over [0, 1].

    ``evaluator``, when present, gives the underlying function off the mesh
    (solvers attach their integral representation); otherwise evaluation
    interpolates linearly.
    """

    mesh: np.ndarray
    values: np.ndarray
    evaluator: ScalarFn | None = None

    def __post_init__(self):
        mesh = np.asarray(self.mesh, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if mesh.shape != values.shape or mesh.ndim != 1:
            raise ParameterError("mesh and values must be 1-D arrays of equal length")
        object.__setattr__(self, "mesh", mesh)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        if self.evaluator is not None:
            return evaluate(self.evaluator, t)
        return np.interp(t, self.mesh, self.values)

    def with_values(self, values, evaluator=None) -> "GridFunction":
        return GridFunction(self.mesh, values, evaluator)


@lru_cache(maxsize=16)
def fd_weights(offsets: tuple[int, ...], k: int) -> tuple[Fraction, ...]:
    """Exact weights ``w`` with ``f^(k)(t) ~ sum w_j f(t + o_j h) / h**k``.

    Obtained from the Lagrange basis on the integer offsets: ``w_j`` is ``k!``
    times the ``z**k`` coefficient of the basis polynomial of node ``o_j``.
    """
    out = []
    for j, oj in enumerate(offsets):
        poly = [Fraction(1)]
        for i, oi in enumerate(offsets):
            if i == j:
                continue
            den = Fraction(oj - oi)
            nxt = [Fraction(0)] * (len(poly) + 1)
            for p, c in enumerate(poly):
                nxt[p] -= c * oi / den
                nxt[p + 1] += c / den
            poly = nxt
        out.append(poly[k] * factorial(k) if k < len(poly) else Fraction(0))
    return tuple(out)


def _as_long(fracs) -> np.ndarray:
    return np.array([np.longdouble(f.numerator) / np.longdouble(f.denominator) for f in fracs])


def operator_terms(orders: Sequence[float]) -> list[tuple[int, float, float]]:
    """Expand ``D^{orders[-1]} ... D^{orders[0]}`` as ``sum c t**e x^(k)``.

    Uses ``D^a (t**e x^(k)) = e t**(e-a) x^(k) + t**(e+1-a) x^(k+1)``.
    Returns ``(k, e, c)`` triples.
    """
    terms = [(0, 0.0, 1.0)]
    for a in orders:
        nxt = []
        for k, e, c in terms:
            if e != 0.0:
                nxt.append((k, e - a, c * e))
            nxt.append((k + 1, e + 1.0 - a, c))
        terms = nxt
    return terms


def derivative_stack(x: ScalarFn, t, kmax: int, rel_step: float = WIDE_REL_STEP,
                     side: str = "central", extended: bool = False) -> np.ndarray:
    """Ordinary derivatives ``x^(k)(t)`` for ``k = 0..kmax``, stacked on a new last axis.

    Central stencils use ``2 * WIDE_HALF + 1`` points with step
    ``min(rel_step * t, (1 - t) / (WIDE_HALF + 1))``; the backward one uses
    as many points below ``t`` with step ``rel_step * t``.  With
    ``extended`` the stencil runs in ``longdouble`` (about 25x slower, and
    only useful when ``x`` itself computes in extended precision).
    """
    dtype = np.longdouble if extended else np.float64
    t = np.asarray(t, dtype=dtype)
    if side == "central":
        offsets = tuple(range(-WIDE_HALF, WIDE_HALF + 1))
        h = np.minimum(rel_step * t, (1.0 - t) / (WIDE_HALF + 1))
    elif side == "backward":
        offsets = tuple(range(0, -2 * WIDE_HALF - 1, -1))
        h = rel_step * t
    else:
        raise ParameterError(f"unknown stencil side {side!r}")
    if np.any(h <= 0.0) or np.any(t + min(offsets) * h <= 0.0):
        raise StencilError("stencil leaves (0, 1]", required_margin=END_MARGIN)
    vals = evaluate(x, t[..., None] + np.array(offsets, dtype=dtype) * h[..., None])
    vals = vals.astype(dtype)
    W = np.stack([_as_long(fd_weights(offsets, k)) for k in range(kmax + 1)], axis=-1).astype(dtype)
    return (vals @ W) / h[..., None] ** np.arange(kmax + 1)


def apply_terms(terms, t, derivs) -> np.ndarray:
    t = np.asarray(t, dtype=derivs.dtype)
    out = np.zeros_like(t)
    for k, e, c in terms:
        out = out + c * t ** e * derivs[..., k]
    return out


def iterated_conf_diff(x: ScalarFn | GridFunction, orders: Sequence[float], t,
                       rel_step: Sequence[float] | float | None = None,
                       side: str = "central", scale_floor: float = 0.0,
                       method: str = "expanded", extended: bool = False):
    """Apply ``D^{orders[0]}`` first, then ``D^{orders[1]}``, and so on.

    The default ``method="expanded"`` rewrites the composite operator as
    ``sum c t**e x^(k)`` and takes all ordinary derivatives from one wide
    stencil (see ``derivative_stack``), so four levels cost nine function
    values per point.  Central stencils need ``END_MARGIN`` room below 1.
    ``extended`` runs that stencil in ``longdouble``.

    ``method="nested"`` differences level by level instead.  Each level uses a 4th-order stencil with step ``rel_step * max(p,
    scale_floor)`` at stencil point ``p``.  Functions here vary on the scale
    of their distance to 0, so a pure fraction of ``p`` resolves points very
    close to zero; the floor keeps steps from shrinking needlessly in the
    interior.  ``side="backward"`` keeps every stencil point at or below
    ``t`` (used at t = 1).  Passing ``t`` as ``np.longdouble`` carries the
    whole stencil, and the function evaluations, in extended precision.
    """
    orders = [check_order(o, "order") for o in orders]
    n = len(orders)
    if not 1 <= n <= 4:
        raise ParameterError("between one and four orders are supported")
    if method == "expanded":
        rel = WIDE_REL_STEP if rel_step is None else rel_step
        return _expanded_diff(x, orders, t, rel, side, extended)
    if method != "nested":
        raise ParameterError(f"unknown method {method!r}")
    if rel_step is None:
        rel_step = NESTED_REL_STEP[n]
    rel = np.broadcast_to(np.asarray(rel_step, dtype=float), (n,))
    offsets, coef = {"central": CENTRAL, "backward": BACKWARD, "forward": FORWARD}[side]
    t = as_real(t)

    # every stencil point stays within t -+ reach * max(t, floor), up to O(reach**2)
    reach = float(np.sum(np.max(np.abs(offsets)) * rel))
    span = reach * (1.0 + reach) * np.maximum(t, scale_floor)
    lo = t - span if side != "forward" else t
    hi = t + span if side != "backward" else t
    if np.any(lo <= 0.0) or np.any(hi > 1.0):
        raise StencilError(
            f"stencil reach {float(np.max(span)):.3g} around t leaves (0, 1]",
            required_margin=float(np.max(span)),
        )

    def level(points: np.ndarray, k: int) -> np.ndarray:
        if k < 0:
            return evaluate(x, points)
        h = rel[k] * np.maximum(points, scale_floor)
        inner = level(points[..., None] + offsets * h[..., None], k - 1)
        return points ** (1.0 - orders[k]) * (inner @ coef) / h

    out = level(t, n - 1).astype(float)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite iterated derivative")
    return out if out.ndim else float(out)


def _expanded_diff(x, orders, t, rel_step, side, extended):
    t = as_real(t)
    if np.any(t <= 0.0) or np.any(t > 1.0):
        raise DomainError("iterated derivative is evaluated on (0, 1]")
    if side == "central" and np.any(t > 1.0 - END_MARGIN):
        raise StencilError(f"central stencil needs t <= {1.0 - END_MARGIN}",
                           required_margin=END_MARGIN)
    terms = operator_terms(orders)
    derivs = derivative_stack(x, t, len(orders), float(rel_step), side, extended)
    out = apply_terms(terms, t, derivs).astype(float)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite iterated derivative")
    return out if out.ndim else float(out)
