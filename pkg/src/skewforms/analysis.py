"""Classification engines for forms and relations.

Closed/exact verdicts with potential reconstruction, identical vs
nonidentical relations, Frobenius integrability, characteristic curves,
pseudostructure (degenerate-locus) detection, numeric Stokes checks, and
the (p, k, n) classification table.

Verdicts are three-valued throughout; "unknown" zero tests propagate and
are never coerced into a definite answer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .expr import (
    Add,
    Const,
    DomainError,
    Expression,
    Func,
    Mul,
    Pow,
    Var,
    VariableSet,
    ZERO,
    const,
    differentiate,
    evaluate,
    free_variables,
    is_zero,
    mul,
    substitute,
    var,
)
from .forms import (
    Commutator,
    DifferentialForm,
    Parameterization,
    commutator,
    exterior_derivative,
    pullback,
    wedge,
    zero_verdict,
)
from .duality import Metric, hodge_star

__all__ = [
    "AnalysisError",
    "ClosureVerdict",
    "Relation",
    "Locus",
    "StructureReport",
    "classify_closure",
    "classify_relation",
    "reconstruct_potential",
    "potential_at",
    "frobenius_test",
    "characteristic_curve",
    "find_pseudostructure",
    "jacobian_determinant",
    "stokes_check",
    "classification_table",
]

CRITICAL_GRADIENT_TOL = 1e-12


class AnalysisError(ValueError):
    """An analysis operation was called outside its preconditions."""


# --- closure and exactness ---------------------------------------------------


@dataclass
class ClosureVerdict:
    closed: str            # "closed" | "unclosed" | "unknown"
    exact: str             # "exact" | "inexact" | "unknown"
    potential: Expression | None = None
    notes: str = ""


def _polynomial_in(e: Expression, names: set[str]) -> bool:
    """True when e is polynomial in the given names (integer powers >= 0,
    no name under a function or inside a non-monomial power base)."""
    if isinstance(e, Const):
        return True
    if isinstance(e, Var):
        return True
    if isinstance(e, Add):
        return all(_polynomial_in(t, names) for t in e.terms)
    if isinstance(e, Mul):
        return all(_polynomial_in(f, names) for f in e.factors)
    if isinstance(e, Pow):
        if not (free_variables(e.base) & names):
            return True
        return e.exponent.denominator == 1 and e.exponent >= 0 and _polynomial_in(e.base, names)
    if isinstance(e, Func):
        return not (free_variables(e.arg) & names)
    return False


def _fresh_name(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "_"
    return name


def _integrate_unit_interval(e: Expression, t: str) -> Expression | None:
    """Exact integral over t in [0, 1] of an expression polynomial in t."""
    terms = e.terms if isinstance(e, Add) else (e,)
    out = ZERO
    for term in terms:
        factors = term.factors if isinstance(term, Mul) else (term,)
        degree = Fraction(0)
        rest: list[Expression] = []
        ok = True
        for f in factors:
            base, exponent = (f.base, f.exponent) if isinstance(f, Pow) else (f, Fraction(1))
            if isinstance(base, Var) and base.name == t:
                if exponent.denominator != 1 or exponent < 0:
                    ok = False
                    break
                degree += exponent
            else:
                if t in free_variables(f):
                    ok = False
                    break
                rest.append(f)
        if not ok:
            return None
        out = out + mul(const(Fraction(1, int(degree) + 1)), *rest)
    return out


def reconstruct_potential(a: DifferentialForm) -> Expression | None:
    """Potential of a 1-form by homotopy integration from the origin.

    phi(x) = sum_i x_i * integral_0^1 a_i(t*x) dt, evaluated exactly for
    polynomial coefficients.  Valid on star-shaped domains about the
    origin.  Returns None when a coefficient is not polynomial.
    """
    if a.degree != 1:
        raise AnalysisError("potential reconstruction needs a 1-form")
    names = a.vars.names
    if not all(_polynomial_in(c, set(names)) for _, c in a.items()):
        return None
    t = _fresh_name("t", set(names))
    scale = {name: mul(var(t), var(name)) for name in names}
    total = ZERO
    for i, name in enumerate(names, start=1):
        ai = a.coefficient((i,))
        if ai == ZERO:
            continue
        integrated = _integrate_unit_interval(substitute(ai, scale), t)
        if integrated is None:
            return None
        total = total + mul(var(name), integrated)
    return total


def potential_at(a: DifferentialForm, point: Mapping[str, float], nodes: int = 64) -> float:
    """Numeric homotopy potential at a point (for non-polynomial closed forms)."""
    if a.degree != 1:
        raise AnalysisError("potential evaluation needs a 1-form")
    ts, ws = np.polynomial.legendre.leggauss(nodes)
    ts = 0.5 * (ts + 1.0)
    ws = 0.5 * ws
    names = a.vars.names
    total = 0.0
    for t, w in zip(ts.tolist(), ws.tolist()):
        scaled = {name: t * point[name] for name in names}
        for i, name in enumerate(names, start=1):
            ai = a.coefficient((i,))
            if ai == ZERO:
                continue
            total += w * point[name] * evaluate(ai, scaled)
    return total


def classify_closure(a: DifferentialForm) -> ClosureVerdict:
    """Closed/exact verdicts; reconstructs potentials of exact 1-forms."""
    derivative = exterior_derivative(a)
    closed = {"zero": "closed", "nonzero": "unclosed", "unknown": "unknown"}[zero_verdict(derivative)]
    notes: list[str] = []

    if closed == "unclosed":
        return ClosureVerdict(closed, "inexact")

    if a.degree == 0:
        v = zero_verdict(a)
        if v == "zero":
            return ClosureVerdict(closed, "exact", None, "zero 0-form")
        exact = "inexact" if v == "nonzero" else "unknown"
        return ClosureVerdict(closed, exact, None, "only the zero 0-form is exact")

    if a.degree == 1:
        potential = reconstruct_potential(a)
        if potential is not None:
            residual = a - exterior_derivative(DifferentialForm.scalar(a.vars, potential))
            if zero_verdict(residual) == "zero":
                if closed != "closed":
                    notes.append("closure certified via the reconstructed potential")
                notes.append("potential valid on star-shaped domains about the origin")
                return ClosureVerdict("closed", "exact", potential, "; ".join(notes))
            notes.append("homotopy potential did not verify")
            return ClosureVerdict(closed, "unknown", None, "; ".join(notes))
        if closed == "closed":
            notes.append("potential reconstruction needs polynomial coefficients")
        return ClosureVerdict(closed, "unknown", None, "; ".join(notes))

    if closed == "closed":
        notes.append("potential reconstruction implemented for 1-forms only")
    return ClosureVerdict(closed, "unknown", None, "; ".join(notes))


# --- relations ----------------------------------------------------------------


@dataclass
class Relation:
    """A relation d(phi) = eta with its identical/nonidentical verdict."""

    phi: DifferentialForm
    eta: DifferentialForm
    verdict: str                      # "identical" | "nonidentical" | "unknown"
    residual: DifferentialForm        # d(phi) - eta
    eta_commutator: Commutator | None


def classify_relation(phi: DifferentialForm, eta: DifferentialForm) -> Relation:
    """Identical iff d(phi) - eta vanishes and eta is closed; nonidentical
    whenever either the residual or d(eta) has a nonzero coefficient."""
    expected = phi.degree + 1
    if eta.degree != expected:
        # a top-degree phi forces eta = 0; accept the clamped zero form there
        if not (expected > eta.vars.dimension and eta.is_structurally_zero()):
            raise AnalysisError(
                f"relation needs deg(eta) = deg(phi)+1, got {eta.degree} and {phi.degree}")
    residual = exterior_derivative(phi) - eta
    residual_v = zero_verdict(residual)
    deta_v = zero_verdict(exterior_derivative(eta))
    if "nonzero" in (residual_v, deta_v):
        verdict = "nonidentical"
    elif residual_v == "zero" and deta_v == "zero":
        verdict = "identical"
    else:
        verdict = "unknown"
    comm = commutator(eta) if eta.degree == 1 else None
    return Relation(phi, eta, verdict, residual, comm)


# --- integrability -------------------------------------------------------------


def _determinant(matrix: list[list[Expression]]) -> Expression:
    if len(matrix) == 1:
        return matrix[0][0]
    total = ZERO
    for j, entry in enumerate(matrix[0]):
        if entry == ZERO:
            continue
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = mul(entry, _determinant(minor))
        total = total + (term if j % 2 == 0 else -term)
    return total


def jacobian_determinant(exprs: Sequence[Expression],
                         variables: VariableSet) -> Expression:
    """Determinant of the Jacobian of a coordinate map.

    One of the degeneracy functionals: its zero locus is where the
    transformation degenerates (alongside commutator components and the
    Frobenius expression w ^ dw).
    """
    exprs = list(exprs)
    if len(exprs) != variables.dimension:
        raise AnalysisError("a square Jacobian needs one expression per coordinate")
    matrix = [[differentiate(e, name) for name in variables.names] for e in exprs]
    return _determinant(matrix)


def frobenius_test(a: DifferentialForm) -> str:
    """Integrability of the kernel distribution of a 1-form: w ^ dw = 0.

    Integral surfaces of an integrable 1-form are candidate pseudostructures.
    """
    if a.degree != 1:
        raise AnalysisError(f"frobenius test needs a 1-form, got degree {a.degree}")
    if a.vars.dimension < 3:
        raise AnalysisError("frobenius test needs dimension >= 3")
    v = zero_verdict(wedge(a, exterior_derivative(a)))
    return {"zero": "integrable", "nonzero": "nonintegrable", "unknown": "unknown"}[v]


# --- characteristic curves ------------------------------------------------------


def characteristic_curve(phi: Expression, variables: VariableSet,
                         start: Sequence[float], steps: int = 10_000,
                         h: float = 1e-3) -> list[tuple[float, float]]:
    """Integrate the level-set direction field (-phi_y, phi_x) with RK4.

    Stops early (partial polyline) if the gradient magnitude drops below
    1e-12 or evaluation leaves the domain; every returned point admits a
    finite value of phi.
    """
    if variables.dimension != 2:
        raise AnalysisError("characteristic curves are computed in two dimensions")
    xn, yn = variables.names
    px = differentiate(phi, xn)
    py = differentiate(phi, yn)

    def field(x: float, y: float) -> tuple[float, float]:
        pt = {xn: x, yn: y}
        return -evaluate(py, pt), evaluate(px, pt)

    points = [(float(start[0]), float(start[1]))]
    x, y = points[0]
    for _ in range(steps):
        try:
            k1 = field(x, y)
            if math.hypot(*k1) < CRITICAL_GRADIENT_TOL:
                break
            k2 = field(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1])
            k3 = field(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1])
            k4 = field(x + h * k3[0], y + h * k3[1])
            nx = x + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            ny = y + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            # every returned point must carry a level value
            evaluate(phi, {xn: nx, yn: ny})
        except DomainError:
            break
        x, y = nx, ny
        points.append((x, y))
    return points


# --- pseudostructure detection ---------------------------------------------------


@dataclass
class Locus:
    kind: str                          # "empty" | "whole_box" | "hyperplane" | "points"
    description: str
    hyperplane: tuple[str, float] | None = None
    points: list[tuple[float, ...]] = field(default_factory=list)


@dataclass
class StructureReport:
    """Detected pseudostructure: where the commutator components vanish."""

    locus: Locus
    restricted_form: DifferentialForm | None
    dual_condition_residual: Expression
    intensity: float
    chart: Parameterization | None = None
    commutator: Commutator | None = None


def _grid_eval(e: Expression, mesh: dict[str, np.ndarray], shape) -> np.ndarray:
    """Vectorized evaluation on a grid; domain violations become NaN."""
    with np.errstate(all="ignore"):
        return np.asarray(_grid_eval_node(e, mesh, shape), dtype=float)


def _grid_eval_node(e: Expression, mesh, shape):
    if isinstance(e, Const):
        try:
            value = float(e.value)
        except OverflowError:
            raise DomainError("constant exceeds the float range") from None
        return np.full(shape, value)
    if isinstance(e, Var):
        return mesh[e.name]
    if isinstance(e, Add):
        out = np.zeros(shape)
        for t in e.terms:
            out = out + _grid_eval_node(t, mesh, shape)
        return out
    if isinstance(e, Mul):
        out = np.ones(shape)
        for f in e.factors:
            out = out * _grid_eval_node(f, mesh, shape)
        return out
    if isinstance(e, Pow):
        base = _grid_eval_node(e.base, mesh, shape)
        r = e.exponent
        if r.denominator == 1:
            return base ** float(int(r))
        return np.where(base >= 0, np.abs(base) ** float(r), np.nan)
    if isinstance(e, Func):
        arg = _grid_eval_node(e.arg, mesh, shape)
        if e.name == "sin":
            return np.sin(arg)
        if e.name == "cos":
            return np.cos(arg)
        if e.name == "exp":
            return np.exp(arg)
        return np.where(arg > 0, np.log(np.where(arg > 0, arg, 1.0)), np.nan)
    raise TypeError(f"not an Expression node: {e!r}")


def _axis_zero_hyperplane(comps: Mapping[tuple[int, int], Expression],
                          variables: VariableSet, box) -> tuple[str, float] | None:
    """Check symbolically whether some coordinate hyperplane x_i = 0 inside
    the box lies in the common zero locus of all commutator components."""
    for i, name in enumerate(variables.names):
        lo, hi = box[i]
        if not lo <= 0.0 <= hi:
            continue
        restricted = [substitute(c, {name: ZERO}) for c in comps.values()]
        if all(is_zero(r) == "zero" for r in restricted):
            return name, 0.0
    return None


def _hyperplane_chart(variables: VariableSet, axis_name: str) -> Parameterization:
    params = VariableSet([n for n in variables.names if n != axis_name])
    coords = [ZERO if n == axis_name else var(n) for n in variables.names]
    return Parameterization(params, coords)


def _bisect_component(comp: Expression, names, lo_pt, hi_pt, tol: float,
                      max_iter: int = 80) -> tuple[float, ...] | None:
    """Bisect one commutator component along a grid edge to |K| <= tol."""

    def value(pt):
        return evaluate(comp, dict(zip(names, pt)))

    try:
        f_lo, f_hi = value(lo_pt), value(hi_pt)
    except DomainError:
        return None
    if f_lo == 0.0:
        return tuple(lo_pt)
    if f_hi == 0.0:
        return tuple(hi_pt)
    if f_lo * f_hi > 0:
        return None
    a, b = list(lo_pt), list(hi_pt)
    for _ in range(max_iter):
        mid = [0.5 * (ai + bi) for ai, bi in zip(a, b)]
        try:
            f_mid = value(mid)
        except DomainError:
            return None
        if abs(f_mid) <= tol:
            return tuple(mid)
        if f_lo * f_mid < 0:
            b = mid
        else:
            a, f_lo = mid, f_mid
    return None


def find_pseudostructure(a: DifferentialForm, g: Metric, box, grid,
                         tol: float = 1e-6) -> StructureReport:
    """Locate the zero locus of the commutator of a 1-form in a box.

    Symbolic pass: coordinate hyperplanes x_i = 0 are tested exactly and, on
    success, the form is pulled back onto the hyperplane.  Numeric pass:
    grid scan for direct hits and sign changes with bisection refinement;
    reported points satisfy |K| <= tol for every component.  Intensity is
    the largest commutator magnitude on grid nodes adjacent to the locus.
    """
    if a.degree != 1:
        raise AnalysisError("pseudostructure detection needs a 1-form")
    n = a.vars.dimension
    if n not in (2, 3):
        raise AnalysisError("pseudostructure detection supports dimensions 2 and 3")
    box = [(float(lo), float(hi)) for lo, hi in box]
    if len(box) != n:
        raise AnalysisError(f"box must give {n} coordinate ranges")
    if isinstance(grid, int):
        grid = [grid] * n
    grid = [int(gv) for gv in grid]
    if len(grid) != n or any(gv < 3 for gv in grid):
        raise AnalysisError("grid needs at least 3 nodes per axis")

    comm = commutator(a)
    dual_derivative = exterior_derivative(hodge_star(a, g))
    top_key = tuple(range(1, n + 1))
    dual_residual = dual_derivative.coefficient(top_key)

    if comm.zero_verdict() == "zero":
        locus = Locus("whole_box", "entire box (form closed everywhere)")
        return StructureReport(locus, a, dual_residual, 0.0, None, comm)

    names = a.vars.names
    axes = [np.linspace(lo, hi, gv) for (lo, hi), gv in zip(box, grid)]
    mesh_arrays = np.meshgrid(*axes, indexing="ij")
    mesh = {name: arr for name, arr in zip(names, mesh_arrays)}
    shape = mesh_arrays[0].shape

    comp_values = {pair: _grid_eval(c, mesh, shape) for pair, c in comm.components.items()}
    with np.errstate(all="ignore"):
        max_abs = np.zeros(shape)
        for arr in comp_values.values():
            max_abs = np.maximum(max_abs, np.abs(arr))
        max_abs = np.where(np.isnan(max_abs), np.inf, max_abs)

    accepted: dict[tuple[float, ...], tuple[int, ...]] = {}

    def accept(pt: tuple[float, ...], node_idx: tuple[int, ...]):
        key = tuple(round(v, 9) for v in pt)
        accepted.setdefault(key, node_idx)

    hit_nodes = np.argwhere(max_abs <= tol)
    for node in hit_nodes:
        idx = tuple(int(v) for v in node)
        accept(tuple(float(axes[d][idx[d]]) for d in range(n)), idx)

    # sign-change edges, refined per driving component then checked globally
    for pair, arr in comp_values.items():
        comp = comm.components[pair]
        for axis in range(n):
            lead = np.take(arr, range(0, shape[axis] - 1), axis=axis)
            trail = np.take(arr, range(1, shape[axis]), axis=axis)
            with np.errstate(all="ignore"):
                flips = np.argwhere((lead * trail) < 0)
            for node in flips:
                idx = list(int(v) for v in node)
                hi_idx = list(idx)
                hi_idx[axis] += 1
                lo_pt = [float(axes[d][idx[d]]) for d in range(n)]
                hi_pt = [float(axes[d][hi_idx[d]]) for d in range(n)]
                root = _bisect_component(comp, names, lo_pt, hi_pt, tol)
                if root is None:
                    continue
                point = dict(zip(names, root))
                try:
                    if all(abs(evaluate(c, point)) <= tol for c in comm.components.values()):
                        accept(root, tuple(idx))
                except DomainError:
                    continue

    hyperplane = _axis_zero_hyperplane(comm.components, a.vars, box)
    restricted = None
    chart = None
    if hyperplane is not None:
        chart = _hyperplane_chart(a.vars, hyperplane[0])
        restricted = pullback(a, chart)

    if not accepted and hyperplane is None:
        locus = Locus("empty", "no structure realized")
        return StructureReport(locus, None, dual_residual, 0.0, None, comm)

    # intensity: the largest |K| on grid nodes adjacent to the locus
    intensity = 0.0
    for node_idx in accepted.values():
        for offsets in itertools.product((-1, 0, 1), repeat=n):
            neighbor = tuple(node_idx[d] + offsets[d] for d in range(n))
            if all(0 <= neighbor[d] < shape[d] for d in range(n)):
                value = max_abs[neighbor]
                if np.isfinite(value):
                    intensity = max(intensity, float(value))

    points = sorted(accepted)
    if hyperplane is not None:
        name, value = hyperplane
        locus = Locus("hyperplane", f"{name} = {value:g} (hyperplane)", hyperplane, points)
    else:
        locus = Locus("points", f"point cloud ({len(points)} points)", None, points)
    return StructureReport(locus, restricted, dual_residual, intensity, chart, comm)


# --- integral checks ---------------------------------------------------------


_GAUSS_NODES, _GAUSS_WEIGHTS = (tuple(v.tolist()) for v in np.polynomial.legendre.leggauss(16))
_PANELS = 4  # 4 panels x 16 nodes = 64 nodes per edge


def _gauss_1d(f, lo: float, hi: float) -> float:
    """Composite Gauss-Legendre quadrature on [lo, hi]."""
    total = 0.0
    width = (hi - lo) / _PANELS
    for p in range(_PANELS):
        a = lo + p * width
        mid = a + 0.5 * width
        half = 0.5 * width
        for node, weight in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
            total += weight * f(mid + half * node)
        # weights sum to 2 on the reference panel
    return total * 0.5 * width


def stokes_check(a: DifferentialForm, rect) -> tuple[float, float, float]:
    """Boundary line integral vs area integral of d(a) on a rectangle.

    Returns (boundary, area, |difference|); counterclockwise orientation.
    """
    if a.degree != 1 or a.vars.dimension != 2:
        raise AnalysisError("stokes check needs a 1-form in two dimensions")
    x0, x1, y0, y1 = (float(v) for v in rect)
    if not (x0 < x1 and y0 < y1):
        raise AnalysisError("rectangle must satisfy x0 < x1 and y0 < y1")
    xn, yn = a.vars.names
    a1 = a.coefficient((1,))
    a2 = a.coefficient((2,))

    boundary = 0.0
    boundary += _gauss_1d(lambda x: evaluate(a1, {xn: x, yn: y0}), x0, x1)
    boundary += _gauss_1d(lambda y: evaluate(a2, {xn: x1, yn: y}), y0, y1)
    boundary -= _gauss_1d(lambda x: evaluate(a1, {xn: x, yn: y1}), x0, x1)
    boundary -= _gauss_1d(lambda y: evaluate(a2, {xn: x0, yn: y}), y0, y1)

    integrand = differentiate(a2, xn) - differentiate(a1, yn)
    area = _gauss_1d(
        lambda x: _gauss_1d(lambda y: evaluate(integrand, {xn: x, yn: y}), y0, y1),
        x0, x1)
    return boundary, area, abs(boundary - area)


# --- classification table ------------------------------------------------------


def classification_table(p: int, n: int) -> list[tuple[int, int]]:
    """Rows (k, pseudostructure dimension n+1-k) for k = p down to 0.

    The dimension is reported verbatim even where it exceeds n.
    """
    if not 0 <= p <= 3:
        raise AnalysisError("the form degree p must be between 0 and 3")
    if n < 1:
        raise AnalysisError("the space dimension n must be at least 1")
    return [(k, n + 1 - k) for k in range(p, -1, -1)]
