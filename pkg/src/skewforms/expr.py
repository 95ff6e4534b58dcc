"""Symbolic scalar expressions used as differential-form coefficients.

Expression trees are immutable.  Build them through the factory functions
(``const``, ``var``, ``add``, ``mul``, ``power``, ``sin``, ``cos``, ``exp``,
``ln``) or the overloaded arithmetic operators, which all canonicalize on
construction.  The canonical form is a fully expanded sum of terms: each
term is an exact rational constant times a product of atomic powers, where
an atom is a variable, one of the elementary functions sin/cos/exp/ln, or a
power of a base that cannot be expanded (a sum raised to a negative or
fractional exponent).  Two expressions that normalize to the same tree
compare equal with ``==``.

Constants are exact ``Fraction`` values; floats are rejected so that
structural zero tests (e.g. dd = 0) stay exact.

Zero-testing is three-valued.  "zero" is certified only by exact
normalization, including clearing denominators of rational functions.
"nonzero" is certified by an exact nonzero constant or by a randomized
numeric witness.  Everything else is "unknown".
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

__all__ = [
    "Expression",
    "Const",
    "Var",
    "Add",
    "Mul",
    "Pow",
    "Func",
    "VariableSet",
    "DomainError",
    "UnknownVariableError",
    "ZERO",
    "ONE",
    "const",
    "var",
    "add",
    "mul",
    "power",
    "sin",
    "cos",
    "exp",
    "ln",
    "simplify",
    "differentiate",
    "substitute",
    "evaluate",
    "free_variables",
    "is_zero",
    "to_text",
]

FUNCTION_NAMES = ("sin", "cos", "exp", "ln")

PROBE_POINTS = 64
PROBE_THRESHOLD = 1e-9
PROBE_BOX = 2.0


class DomainError(ArithmeticError):
    """Numeric evaluation left the real domain (ln <= 0, 1/0, overflow)."""


class UnknownVariableError(ValueError):
    """A variable name is unbound or outside the declared variable set."""


def _coerce(value):
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, Fraction)):
        return const(value)
    return None


@dataclass(frozen=True, slots=True)
class Expression:
    """Base node. Instances built via the factories are always canonical."""

    def __add__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else add(self, mul(NEG_ONE, other))

    def __rsub__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else add(other, mul(NEG_ONE, self))

    def __mul__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else mul(self, power(other, -1))

    def __rtruediv__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else mul(other, power(self, -1))

    def __pow__(self, exponent):
        return power(self, exponent)

    def __neg__(self):
        return mul(NEG_ONE, self)

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Const(Expression):
    value: Fraction


@dataclass(frozen=True, slots=True)
class Var(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class Add(Expression):
    terms: tuple[Expression, ...]


@dataclass(frozen=True, slots=True)
class Mul(Expression):
    factors: tuple[Expression, ...]


@dataclass(frozen=True, slots=True)
class Pow(Expression):
    base: Expression
    exponent: Fraction


@dataclass(frozen=True, slots=True)
class Func(Expression):
    name: str
    arg: Expression


def const(value) -> Const:
    """Exact rational constant. Floats are rejected; use Fraction or str."""
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a Fraction, int or str")
    return Const(Fraction(value))


ZERO = const(0)
ONE = const(1)
NEG_ONE = const(-1)


def var(name: str) -> Var:
    if not name or not name.isidentifier():
        raise ValueError(f"not a valid variable name: {name!r}")
    return Var(name)


class VariableSet:
    """Ordered, distinct coordinate names; dimension is the name count."""

    __slots__ = ("names",)

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if not names:
            raise ValueError("a variable set needs at least one name")
        seen = set()
        for name in names:
            if not name or not name.isidentifier():
                raise ValueError(f"not a valid variable name: {name!r}")
            if name in seen:
                raise ValueError(f"duplicate variable name: {name!r}")
            seen.add(name)
        object.__setattr__(self, "names", names)

    def __setattr__(self, *_):
        raise AttributeError("VariableSet is immutable")

    @property
    def dimension(self) -> int:
        return len(self.names)

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return name in self.names

    def position(self, name: str) -> int:
        """1-based index of a coordinate name."""
        try:
            return self.names.index(name) + 1
        except ValueError:
            raise UnknownVariableError(f"unknown variable: {name!r}") from None

    def name_at(self, index: int) -> str:
        """Coordinate name at a 1-based index."""
        if not 1 <= index <= len(self.names):
            raise IndexError(f"coordinate index out of range: {index}")
        return self.names[index - 1]

    def __eq__(self, other):
        return isinstance(other, VariableSet) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"VariableSet({', '.join(self.names)})"


# --- canonicalization -------------------------------------------------------

_RANK = {Const: 0, Var: 1, Func: 2, Pow: 3, Mul: 4, Add: 5}


def _sort_key(e: Expression):
    if isinstance(e, Const):
        return (0, e.value)
    if isinstance(e, Var):
        return (1, e.name)
    if isinstance(e, Func):
        return (2, e.name, _sort_key(e.arg))
    if isinstance(e, Pow):
        return (3, _sort_key(e.base), e.exponent)
    if isinstance(e, Mul):
        return (4, tuple(_sort_key(f) for f in e.factors))
    return (5, tuple(_sort_key(t) for t in e.terms))


def _as_term(e: Expression) -> tuple[Fraction, tuple[Expression, ...]]:
    """Split a canonical term into (rational coefficient, monomial factors)."""
    if isinstance(e, Const):
        return e.value, ()
    if isinstance(e, Mul):
        if isinstance(e.factors[0], Const):
            return e.factors[0].value, e.factors[1:]
        return Fraction(1), e.factors
    return Fraction(1), (e,)


def _from_term(coeff: Fraction, monomial: tuple[Expression, ...]) -> Expression:
    if not monomial:
        return Const(coeff)
    if coeff == 1:
        return monomial[0] if len(monomial) == 1 else Mul(monomial)
    return Mul((Const(coeff),) + monomial)


def _as_power(e: Expression) -> tuple[Expression, Fraction]:
    if isinstance(e, Pow):
        return e.base, e.exponent
    return e, Fraction(1)


def _factor_key(f: Expression):
    base, e = _as_power(f)
    return (_sort_key(base), e)


def add(*parts: Expression) -> Expression:
    """Canonical sum: flatten, fold constants, collect like terms, sort."""
    acc: dict[tuple[Expression, ...], Fraction] = {}
    for part in parts:
        terms = part.terms if isinstance(part, Add) else (part,)
        for t in terms:
            coeff, mono = _as_term(t)
            acc[mono] = acc.get(mono, Fraction(0)) + coeff
    kept = [(mono, c) for mono, c in acc.items() if c != 0]
    if not kept:
        return ZERO
    kept.sort(key=lambda item: tuple(_sort_key(f) for f in item[0]))
    out = [_from_term(c, mono) for mono, c in kept]
    return out[0] if len(out) == 1 else Add(tuple(out))


def mul(*parts: Expression) -> Expression:
    """Canonical product: fold constants, merge exponents, distribute sums.

    Sums accumulate in the same base/exponent table as their inverse-power
    atoms, so (x+y) * (x+y)^-1 cancels exactly before any distribution.
    """
    coeff = Fraction(1)
    powers: dict[Expression, Fraction] = {}
    stack = list(parts)
    while stack:
        p = stack.pop()
        if isinstance(p, Mul):
            stack.extend(p.factors)
        elif isinstance(p, Const):
            if p.value == 0:
                return ZERO
            coeff *= p.value
        else:
            base, e = _as_power(p)
            powers[base] = powers.get(base, Fraction(0)) + e

    factors: list[Expression] = []
    sums: list[Add] = []
    for base in sorted(powers, key=_sort_key):
        e = powers[base]
        if e == 0:
            continue
        if isinstance(base, Add) and e.denominator == 1 and 1 <= e <= _MAX_EXPANSION_EXPONENT:
            sums.extend([base] * int(e))
            continue
        folded = power(base, e)
        if isinstance(folded, Const):
            if folded.value == 0:
                return ZERO
            coeff *= folded.value
        elif isinstance(folded, Add):
            sums.append(folded)
        elif isinstance(folded, Mul):
            # content extraction or exponent folding can re-split the power
            sub_c, sub_m = _as_term(folded)
            coeff *= sub_c
            for f in sub_m:
                (sums if isinstance(f, Add) else factors).append(f)
        else:
            factors.append(folded)

    if sums:
        cross: list[tuple[Expression, ...]] = [()]
        for s in sums:
            cross = [chosen + (t,) for chosen in cross for t in s.terms]
        pieces = [mul(Const(coeff), *factors, *chosen) for chosen in cross]
        return add(*pieces)

    factors.sort(key=_factor_key)
    if not factors:
        return Const(coeff)
    if coeff == 1:
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))
    return Mul((Const(coeff),) + tuple(factors))


_MAX_EXPANSION_EXPONENT = 64


def _nth_root_exact(value: int, n: int) -> int | None:
    if value < 0:
        return None
    try:
        root = round(value ** (1.0 / n))
    except OverflowError:
        return None
    for candidate in (root - 1, root, root + 1):
        if candidate >= 0 and candidate**n == value:
            return candidate
    return None


def _content(e: Add, signed: bool) -> Fraction:
    """Rational content of a sum's coefficients; signed content carries the
    leading term's sign so that content-free bases are sign-normalized."""
    num_gcd = 0
    den_lcm = 1
    for t in e.terms:
        c, _ = _as_term(t)
        num_gcd = math.gcd(num_gcd, abs(c.numerator))
        den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
    content = Fraction(num_gcd, den_lcm)
    if content == 0:
        return Fraction(1)
    if signed and _as_term(e.terms[0])[0] < 0:
        return -content
    return content


def power(base: Expression, exponent) -> Expression:
    """Canonical power with an exact rational exponent."""
    if isinstance(exponent, float):
        raise TypeError("exponents must be exact; pass a Fraction, int or str")
    e = Fraction(exponent)
    if e == 0:
        return ONE  # 0^0 := 1 by convention
    if e == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and e < 0:
            return Pow(base, e)  # undefined; evaluation raises
        if e.denominator == 1:
            return Const(base.value ** int(e))
        if base.value >= 0:
            num = _nth_root_exact(base.value.numerator, e.denominator)
            den = _nth_root_exact(base.value.denominator, e.denominator)
            if num is not None and den is not None:
                return Const(Fraction(num, den) ** e.numerator)
        return Pow(base, e)
    if isinstance(base, Pow):
        if e.denominator == 1:
            return power(base.base, base.exponent * e)
        return Pow(base, e)
    if isinstance(base, Mul) and e.denominator == 1:
        return mul(*[power(f, e) for f in base.factors])
    if isinstance(base, Add):
        if e.denominator == 1 and 1 < e <= _MAX_EXPANSION_EXPONENT:
            return mul(*([base] * int(e)))
        content = _content(base, signed=e.denominator == 1)
        if content != 1:
            reduced = mul(Const(1 / content), base)
            return mul(power(Const(content), e), power(reduced, e))
    return Pow(base, e)


def _fn(name: str, arg: Expression) -> Expression:
    if arg == ZERO:
        if name == "sin":
            return ZERO
        if name in ("cos", "exp"):
            return ONE
    if name == "ln" and arg == ONE:
        return ZERO
    return Func(name, arg)


def sin(arg: Expression) -> Expression:
    return _fn("sin", arg)


def cos(arg: Expression) -> Expression:
    return _fn("cos", arg)


def exp(arg: Expression) -> Expression:
    return _fn("exp", arg)


def ln(arg: Expression) -> Expression:
    return _fn("ln", arg)


def simplify(e: Expression) -> Expression:
    """Rebuild a tree bottom-up through the canonicalizing factories.

    Identity on trees that are already canonical.
    """
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Add):
        return add(*[simplify(t) for t in e.terms])
    if isinstance(e, Mul):
        return mul(*[simplify(f) for f in e.factors])
    if isinstance(e, Pow):
        return power(simplify(e.base), e.exponent)
    if isinstance(e, Func):
        return _fn(e.name, simplify(e.arg))
    raise TypeError(f"not an Expression node: {e!r}")


# --- calculus ---------------------------------------------------------------


def differentiate(e: Expression, v: str, scope: VariableSet | None = None) -> Expression:
    """Partial derivative with respect to the variable named ``v``.

    When a ``scope`` is given, ``v`` must be one of its names; callers with a
    declared coordinate set pass it so misspelled names fail loudly.
    """
    if scope is not None and v not in scope:
        raise UnknownVariableError(f"unknown variable: {v!r}")
    return _diff(e, v)


def _diff(e: Expression, v: str) -> Expression:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Add):
        return add(*[_diff(t, v) for t in e.terms])
    if isinstance(e, Mul):
        pieces = []
        for i, f in enumerate(e.factors):
            df = _diff(f, v)
            if df == ZERO:
                continue
            pieces.append(mul(*e.factors[:i], df, *e.factors[i + 1 :]))
        return add(*pieces) if pieces else ZERO
    if isinstance(e, Pow):
        db = _diff(e.base, v)
        if db == ZERO:
            return ZERO
        return mul(Const(e.exponent), power(e.base, e.exponent - 1), db)
    if isinstance(e, Func):
        da = _diff(e.arg, v)
        if da == ZERO:
            return ZERO
        if e.name == "sin":
            outer = cos(e.arg)
        elif e.name == "cos":
            outer = mul(NEG_ONE, sin(e.arg))
        elif e.name == "exp":
            outer = exp(e.arg)
        else:  # ln
            outer = power(e.arg, -1)
        return mul(outer, da)
    raise TypeError(f"not an Expression node: {e!r}")


def substitute(e: Expression, mapping: Mapping[str, Expression]) -> Expression:
    """Replace variables by expressions; the result is canonical."""
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Add):
        return add(*[substitute(t, mapping) for t in e.terms])
    if isinstance(e, Mul):
        return mul(*[substitute(f, mapping) for f in e.factors])
    if isinstance(e, Pow):
        return power(substitute(e.base, mapping), e.exponent)
    if isinstance(e, Func):
        return _fn(e.name, substitute(e.arg, mapping))
    raise TypeError(f"not an Expression node: {e!r}")


def free_variables(e: Expression) -> frozenset[str]:
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Add):
        return frozenset().union(*[free_variables(t) for t in e.terms])
    if isinstance(e, Mul):
        return frozenset().union(*[free_variables(f) for f in e.factors])
    if isinstance(e, Pow):
        return free_variables(e.base)
    if isinstance(e, Func):
        return free_variables(e.arg)
    raise TypeError(f"not an Expression node: {e!r}")


def evaluate(e: Expression, point: Mapping[str, float]) -> float:
    """IEEE double evaluation; yields a finite float or raises DomainError."""
    value = _eval(e, point)
    if not math.isfinite(value):
        raise DomainError("result is not finite")
    return value


def _eval(e: Expression, point: Mapping[str, float]) -> float:
    if isinstance(e, Const):
        try:
            return float(e.value)
        except OverflowError:
            raise DomainError("constant exceeds the float range") from None
    if isinstance(e, Var):
        try:
            return float(point[e.name])
        except KeyError:
            raise UnknownVariableError(f"unbound variable: {e.name!r}") from None
    if isinstance(e, Add):
        return math.fsum(_eval(t, point) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, point)
        return out
    if isinstance(e, Pow):
        base = _eval(e.base, point)
        r = e.exponent
        if r.denominator == 1:
            try:
                return float(base ** int(r))
            except ZeroDivisionError:
                raise DomainError("division by zero") from None
            except OverflowError:
                raise DomainError("overflow in power") from None
        if base < 0:
            raise DomainError("fractional power of a negative base")
        if base == 0 and r < 0:
            raise DomainError("division by zero")
        try:
            return base ** float(r)
        except OverflowError:
            raise DomainError("overflow in power") from None
    if isinstance(e, Func):
        a = _eval(e.arg, point)
        if e.name == "sin":
            return math.sin(a)
        if e.name == "cos":
            return math.cos(a)
        if e.name == "exp":
            try:
                return math.exp(a)
            except OverflowError:
                raise DomainError("overflow in exp") from None
        if a <= 0:
            raise DomainError("ln of a nonpositive value")
        return math.log(a)
    raise TypeError(f"not an Expression node: {e!r}")


# --- zero testing -----------------------------------------------------------


def _denominator_clearings(e: Expression) -> dict[Expression, Fraction]:
    """Bases raised to negative exponents anywhere in the top-level terms."""
    need: dict[Expression, Fraction] = {}
    terms = e.terms if isinstance(e, Add) else (e,)
    for t in terms:
        _, mono = _as_term(t)
        for f in mono:
            base, exponent = _as_power(f)
            if exponent < 0:
                need[base] = max(need.get(base, Fraction(0)), -exponent)
    return need


def _numerator(e: Expression, max_passes: int = 8) -> Expression:
    """Multiply every term by the missing denominators, term by term, until
    no negative powers remain.

    Term-wise multiplication lets sum bases meet their inverse atoms inside
    one product, where the exponents cancel exactly.  Zero-equivalence is
    preserved away from denominator zeros, which is the sense in which
    rational-function normalization certifies zero.
    """
    cur = e
    for _ in range(max_passes):
        need = _denominator_clearings(cur)
        if not need:
            return cur
        clearers: list[Expression] = []
        for base, k in need.items():
            whole = int(k)  # floor for positive k
            clearers.extend([base] * whole)
            if k != whole:
                clearers.append(power(base, k - whole))
        terms = cur.terms if isinstance(cur, Add) else (cur,)
        cur = add(*[mul(t, *clearers) for t in terms])
    return cur


def _probe_for_witness(e: Expression, points: int = PROBE_POINTS,
                       threshold: float = PROBE_THRESHOLD) -> bool:
    names = sorted(free_variables(e))
    rng = random.Random(0x5EED)
    if not names:
        try:
            return abs(evaluate(e, {})) > threshold
        except DomainError:
            return False
    valid = 0
    attempts = 0
    while valid < points and attempts < 8 * points:
        attempts += 1
        point = {n: rng.uniform(-PROBE_BOX, PROBE_BOX) for n in names}
        try:
            value = evaluate(e, point)
        except DomainError:
            continue
        if math.isnan(value):
            continue
        if abs(value) > threshold:
            return True
        valid += 1
    return False


def is_zero(e: Expression) -> str:
    """Three-valued zero test: "zero", "nonzero" or "unknown".

    "zero" only when normalization (after clearing denominators) cancels the
    tree to the literal 0; "nonzero" from an exact nonzero constant or a
    numeric witness above the probe threshold; "unknown" otherwise.
    """
    e = simplify(e)
    if e == ZERO:
        return "zero"
    if isinstance(e, Const):
        return "nonzero"
    numerator = _numerator(e)
    if numerator == ZERO:
        return "zero"
    if isinstance(numerator, Const):
        return "nonzero"
    if _probe_for_witness(e):
        return "nonzero"
    return "unknown"


# --- rendering --------------------------------------------------------------


def _fraction_text(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _power_text(e: Pow) -> str:
    base = e.base
    base_text = to_text(base)
    if isinstance(base, (Add, Mul, Pow)) or (isinstance(base, Const) and base.value < 0):
        base_text = f"({base_text})"
    r = e.exponent
    if r.denominator == 1:
        return f"{base_text}^{r.numerator}"
    return f"{base_text}^({r.numerator}/{r.denominator})"


def _product_text(coeff: Fraction, monomial: tuple[Expression, ...]) -> str:
    parts = [to_text(f) if not isinstance(f, Add) else f"({to_text(f)})" for f in monomial]
    if not parts:
        return _fraction_text(coeff)
    if coeff == 1:
        return "*".join(parts)
    if coeff == -1:
        return "-" + "*".join(parts)
    return "*".join([_fraction_text(coeff)] + parts)


def to_text(e: Expression) -> str:
    """Render a canonical tree; the DSL parser reads the output back."""
    if isinstance(e, Const):
        return _fraction_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Pow):
        return _power_text(e)
    if isinstance(e, Mul):
        coeff, mono = _as_term(e)
        return _product_text(coeff, mono)
    if isinstance(e, Add):
        chunks: list[str] = []
        for t in e.terms:
            coeff, mono = _as_term(t)
            negative = coeff < 0
            body = _product_text(abs(coeff), mono)
            if not chunks:
                chunks.append(("-" if negative else "") + body)
            else:
                chunks.append((" - " if negative else " + ") + body)
        return "".join(chunks)
    raise TypeError(f"not an Expression node: {e!r}")
