"""Exterior algebra: degree-p skew-symmetric forms over a coordinate set.

A form is a sparse map from strictly increasing 1-based index tuples to
coefficient expressions.  Unsorted index tuples are accepted on input; the
permutation sign is folded into the coefficient and repeated indices
annihilate the term.  Structurally zero coefficients are dropped, so the
dd = 0 identity is a structural test.

Degrees above the space dimension collapse to a canonical zero form of the
clamped degree rather than erroring, matching the algebra (Lambda^k = 0 for
k > n).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .expr import (
    Expression,
    VariableSet,
    ZERO,
    ONE,
    const,
    differentiate,
    evaluate,
    free_variables,
    is_zero,
    mul,
    substitute,
    to_text,
)

__all__ = [
    "FormError",
    "DifferentialForm",
    "Commutator",
    "Parameterization",
    "sort_index_tuple",
    "wedge",
    "exterior_derivative",
    "commutator",
    "pullback",
    "evaluate_form",
    "zero_verdict",
    "form_to_text",
]


class FormError(ValueError):
    """Invalid form construction or an operation outside its preconditions."""


def sort_index_tuple(indices: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sort indices, returning (sign, sorted tuple); sign 0 on repeats.

    Insertion sort counting inversions -- O(p^2), fine for p <= 4.
    """
    out: list[int] = []
    sign = 1
    for idx in indices:
        pos = len(out)
        while pos > 0 and out[pos - 1] > idx:
            pos -= 1
        if pos > 0 and out[pos - 1] == idx:
            return 0, ()
        sign *= -1 if (len(out) - pos) % 2 else 1
        out.insert(pos, idx)
    return sign, tuple(out)


def _coerce_coeff(c) -> Expression:
    if isinstance(c, Expression):
        return c
    if isinstance(c, (int, Fraction)):
        return const(c)
    raise FormError(f"coefficient must be an Expression or rational, got {c!r}")


class DifferentialForm:
    """Sparse skew-symmetric form of a fixed degree over a VariableSet."""

    __slots__ = ("vars", "degree", "_coeffs")

    def __init__(self, variables: VariableSet, degree: int,
                 coeffs: Mapping[Sequence[int], Expression] | None = None):
        n = variables.dimension
        if not 0 <= degree <= n:
            raise FormError(f"degree must be between 0 and {n}, got {degree}")
        acc: dict[tuple[int, ...], Expression] = {}
        for raw_idx, raw_c in (coeffs or {}).items():
            idx = tuple(int(i) for i in raw_idx)
            if len(idx) != degree:
                raise FormError(f"index tuple {idx} has length {len(idx)}, expected {degree}")
            for i in idx:
                if not 1 <= i <= n:
                    raise FormError(f"coordinate index {i} outside 1..{n}")
            sign, key = sort_index_tuple(idx)
            if sign == 0:
                continue
            c = _coerce_coeff(raw_c)
            if sign < 0:
                c = -c
            prev = acc.get(key)
            acc[key] = c if prev is None else prev + c
        self.vars = variables
        self.degree = degree
        self._coeffs = {k: c for k, c in sorted(acc.items()) if c != ZERO}

    @classmethod
    def zero(cls, variables: VariableSet, degree: int) -> "DifferentialForm":
        return cls(variables, degree)

    @classmethod
    def scalar(cls, variables: VariableSet, value) -> "DifferentialForm":
        return cls(variables, 0, {(): _coerce_coeff(value)})

    @classmethod
    def one_form(cls, variables: VariableSet, coefficients) -> "DifferentialForm":
        coefficients = list(coefficients)
        if len(coefficients) != variables.dimension:
            raise FormError("one coefficient per coordinate is required")
        return cls(variables, 1, {(i,): c for i, c in enumerate(coefficients, start=1)})

    @classmethod
    def basis(cls, variables: VariableSet, name: str) -> "DifferentialForm":
        """The basis 1-form d<name>."""
        return cls(variables, 1, {(variables.position(name),): ONE})

    @property
    def coefficients(self) -> dict[tuple[int, ...], Expression]:
        return dict(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def coefficient(self, indices: Sequence[int]) -> Expression:
        """Coefficient for an index tuple; unsorted tuples get the sign."""
        sign, key = sort_index_tuple(tuple(indices))
        if sign == 0:
            return ZERO
        c = self._coeffs.get(key, ZERO)
        return -c if sign < 0 and c != ZERO else c

    def is_structurally_zero(self) -> bool:
        return not self._coeffs

    def map_coefficients(self, fn) -> "DifferentialForm":
        return DifferentialForm(self.vars, self.degree,
                                {k: fn(c) for k, c in self._coeffs.items()})

    def __add__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        if self.vars != other.vars:
            raise FormError("forms live over different variable sets")
        if self.degree != other.degree:
            if self.is_structurally_zero():
                return other
            if other.is_structurally_zero():
                return self
            raise FormError(f"cannot add forms of degree {self.degree} and {other.degree}")
        acc = dict(self._coeffs)
        for k, c in other.items():
            acc[k] = acc[k] + c if k in acc else c
        return DifferentialForm(self.vars, self.degree, acc)

    def __neg__(self):
        return self.map_coefficients(lambda c: -c)

    def __sub__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, DifferentialForm):
            return NotImplemented
        s = _coerce_coeff(scalar)
        return self.map_coefficients(lambda c: mul(s, c))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        if self.vars != other.vars:
            return False
        if self.is_structurally_zero() and other.is_structurally_zero():
            return True  # graded zeros are identified
        return self.degree == other.degree and self._coeffs == other._coeffs

    __hash__ = None

    def __str__(self):
        return form_to_text(self)

    def __repr__(self):
        return f"DifferentialForm({form_to_text(self)})"


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    """Exterior product; repeated indices annihilate, signs from sorting."""
    if a.vars != b.vars:
        raise FormError("forms live over different variable sets")
    n = a.vars.dimension
    total = a.degree + b.degree
    if total > n:
        return DifferentialForm.zero(a.vars, n)
    acc: dict[tuple[int, ...], Expression] = {}
    for ia, ca in a.items():
        for ib, cb in b.items():
            sign, key = sort_index_tuple(ia + ib)
            if sign == 0:
                continue
            term = mul(ca, cb)
            if sign < 0:
                term = -term
            prev = acc.get(key)
            acc[key] = term if prev is None else prev + term
    return DifferentialForm(a.vars, total, acc)


def exterior_derivative(a: DifferentialForm) -> DifferentialForm:
    """d: degree p -> p+1; the d of an n-form is the canonical zero form."""
    n = a.vars.dimension
    if a.degree >= n:
        return DifferentialForm.zero(a.vars, n)
    acc: dict[tuple[int, ...], Expression] = {}
    for idx, c in a.items():
        for j, name in enumerate(a.vars.names, start=1):
            dc = differentiate(c, name)
            if dc == ZERO:
                continue
            sign, key = sort_index_tuple((j,) + idx)
            if sign == 0:
                continue
            if sign < 0:
                dc = -dc
            prev = acc.get(key)
            acc[key] = dc if prev is None else prev + dc
    return DifferentialForm(a.vars, a.degree + 1, acc)


def zero_verdict(a: DifferentialForm) -> str:
    """Aggregate three-valued zero test over every coefficient."""
    verdicts = [is_zero(c) for _, c in a.items()]
    if any(v == "nonzero" for v in verdicts):
        return "nonzero"
    if all(v == "zero" for v in verdicts):
        return "zero"
    return "unknown"


@dataclass
class Commutator:
    """Antisymmetrized coefficient derivatives of a 1-form, pairs a < b."""

    vars: VariableSet
    components: dict[tuple[int, int], Expression]

    def component(self, alpha: int, beta: int) -> Expression:
        if alpha == beta:
            return ZERO
        if alpha < beta:
            return self.components[(alpha, beta)]
        return -self.components[(beta, alpha)]

    def zero_verdict(self) -> str:
        verdicts = [is_zero(c) for c in self.components.values()]
        if any(v == "nonzero" for v in verdicts):
            return "nonzero"
        if all(v == "zero" for v in verdicts):
            return "zero"
        return "unknown"

    def __str__(self):
        parts = [f"K_{self.vars.name_at(a)}{self.vars.name_at(b)} = {to_text(c)}"
                 for (a, b), c in self.components.items()]
        return "; ".join(parts)


def commutator(a: DifferentialForm) -> Commutator:
    """K_ab = d(a_b)/dx^a - d(a_a)/dx^b for a 1-form; zero iff d(a) is."""
    if a.degree != 1:
        raise FormError(f"commutator needs a 1-form, got degree {a.degree}")
    names = a.vars.names
    comps: dict[tuple[int, int], Expression] = {}
    for alpha, beta in itertools.combinations(range(1, len(names) + 1), 2):
        c_beta = a.coefficient((beta,))
        c_alpha = a.coefficient((alpha,))
        comps[(alpha, beta)] = (differentiate(c_beta, names[alpha - 1])
                                - differentiate(c_alpha, names[beta - 1]))
    return Commutator(a.vars, comps)


class Parameterization:
    """Map from an m-dimensional parameter space into the coordinate space."""

    __slots__ = ("params", "coords")

    def __init__(self, params: VariableSet, coords: Sequence[Expression]):
        coords = tuple(_coerce_coeff(c) for c in coords)
        for c in coords:
            extra = free_variables(c) - set(params.names)
            if extra:
                raise FormError(f"coordinate expression uses undeclared parameters: {sorted(extra)}")
        self.params = params
        self.coords = coords

    def jacobian(self) -> list[list[Expression]]:
        return [[differentiate(c, t) for t in self.params.names] for c in self.coords]


def pullback(a: DifferentialForm, chart: Parameterization) -> DifferentialForm:
    """Restrict a form along a parameterization: substitute coordinates and
    replace each dx^i by the differential of its coordinate expression."""
    n = a.vars.dimension
    if len(chart.coords) != n:
        raise FormError(f"parameterization must supply {n} coordinate expressions")
    m = chart.params.dimension
    if m >= n:
        raise FormError("parameter count must be smaller than the space dimension")
    if a.degree > m:
        return DifferentialForm.zero(chart.params, m)
    subs = {name: chart.coords[i] for i, name in enumerate(a.vars.names)}
    jac = chart.jacobian()
    acc: dict[tuple[int, ...], Expression] = {}
    for idx, c in a.items():
        c0 = substitute(c, subs)
        for choice in itertools.product(range(1, m + 1), repeat=a.degree):
            sign, key = sort_index_tuple(choice)
            if sign == 0:
                continue
            term = c0
            for slot, i in enumerate(idx):
                term = mul(term, jac[i - 1][choice[slot] - 1])
            if sign < 0:
                term = -term
            prev = acc.get(key)
            acc[key] = term if prev is None else prev + term
    return DifferentialForm(chart.params, a.degree, acc)


def evaluate_form(a: DifferentialForm, point: Mapping[str, float]) -> dict[tuple[int, ...], float]:
    """Evaluate every stored coefficient; absent keys are zero."""
    return {idx: evaluate(c, point) for idx, c in a.items()}


def _basis_text(variables: VariableSet, idx: tuple[int, ...]) -> str:
    return "^".join("d" + variables.name_at(i) for i in idx)


def form_to_text(a: DifferentialForm) -> str:
    """Canonical text: terms sorted by index tuple, signs pulled out front."""
    from .expr import Add, Const, Mul

    if a.is_structurally_zero():
        return "0"
    if a.degree == 0:
        return to_text(a.coefficient(()))
    chunks: list[str] = []
    for idx, c in a.items():
        basis = _basis_text(a.vars, idx)
        negative = False
        body = None
        if isinstance(c, Const):
            negative = c.value < 0
            mag = abs(c.value)
            body = basis if mag == 1 else f"{to_text(const(mag))}*{basis}"
        elif isinstance(c, Mul) and isinstance(c.factors[0], Const) and c.factors[0].value < 0:
            negative = True
            body = f"{to_text(-c)}*{basis}"
        elif isinstance(c, Add):
            body = f"({to_text(c)})*{basis}"
        else:
            body = f"{to_text(c)}*{basis}"
        if not chunks:
            chunks.append(("-" if negative else "") + body)
        else:
            chunks.append((" - " if negative else " + ") + body)
    return "".join(chunks)
