"""Classification engines: closure, relations, integrability, loci, Stokes."""

import math

import pytest

from skewforms.expr import (
    VariableSet, ZERO, ONE, const, differentiate, evaluate, exp, sin, var,
)
from skewforms.forms import DifferentialForm, commutator, exterior_derivative, zero_verdict
from skewforms.duality import Metric
from skewforms.analysis import (
    AnalysisError,
    characteristic_curve,
    classification_table,
    classify_closure,
    classify_relation,
    find_pseudostructure,
    frobenius_test,
    potential_at,
    reconstruct_potential,
    stokes_check,
)

from conftest import VARSETS, random_form, random_polynomial

x, y, z = var("x"), var("y"), var("z")
V2 = VARSETS[2]
V3 = VARSETS[3]
BOX2 = [(-1.0, 1.0), (-1.0, 1.0)]


class TestClassifyClosure:
    def test_gradient_field(self):
        a = DifferentialForm.one_form(V2, [2 * x, 2 * y])
        v = classify_closure(a)
        assert v.closed == "closed"
        assert v.exact == "exact"
        assert v.potential == x**2 + y**2

    def test_unclosed(self):
        a = DifferentialForm.one_form(V2, [y, ZERO])
        v = classify_closure(a)
        assert v.closed == "unclosed"
        assert v.exact == "inexact"
        assert v.potential is None

    def test_cauchy_riemann_closed(self):
        u = 3 * x**2 * y - y**3
        a = DifferentialForm.one_form(V2, [differentiate(u, "x"), differentiate(u, "y")])
        assert classify_closure(a).closed == "closed"

    def test_closed_transcendental_unknown_exact(self):
        a = DifferentialForm.one_form(V2, [exp(x) * sin(y), exp(x) * (-sin(y)) * const(-1)])
        # a = d(exp(x) sin(y)) has cos coefficient; build it honestly
        f = exp(x) * sin(y)
        a = DifferentialForm.one_form(V2, [differentiate(f, "x"), differentiate(f, "y")])
        v = classify_closure(a)
        assert v.closed == "closed"
        assert v.exact == "unknown"
        assert "polynomial" in v.notes

    def test_zero_form_classification(self):
        assert classify_closure(DifferentialForm.scalar(V2, ZERO)).exact == "exact"
        v = classify_closure(DifferentialForm.scalar(V2, const(3)))
        assert v.closed == "closed"
        assert v.exact == "inexact"

    def test_two_form_closed(self):
        a = DifferentialForm(V3, 2, {(1, 2): z})
        v = classify_closure(a)
        assert v.closed == "unclosed"
        b = DifferentialForm(V3, 2, {(1, 2): x})
        v = classify_closure(b)
        assert v.closed == "closed"
        assert v.exact == "unknown"

    def test_dd_always_closed(self, rng):
        for n in (2, 3):
            vs = VARSETS[n]
            for p in range(n - 1):
                for _ in range(10):
                    a = random_form(rng, vs, p)
                    assert classify_closure(exterior_derivative(a)).closed == "closed"

    def test_potentials_verify(self, rng):
        """Reconstructed potential always satisfies d(phi) = a exactly."""
        for _ in range(25):
            f = random_polynomial(rng, ("x", "y"))
            a = DifferentialForm.one_form(V2, [differentiate(f, "x"), differentiate(f, "y")])
            v = classify_closure(a)
            assert v.exact == "exact"
            rebuilt = exterior_derivative(DifferentialForm.scalar(V2, v.potential))
            assert rebuilt == a

    def test_numeric_potential(self):
        f = exp(x) * sin(y)
        a = DifferentialForm.one_form(V2, [differentiate(f, "x"), differentiate(f, "y")])
        value = potential_at(a, {"x": 1.0, "y": 1.0})
        assert value == pytest.approx(math.e * math.sin(1.0), abs=1e-10)


class TestClassifyRelation:
    def test_identical(self):
        phi = DifferentialForm.scalar(V2, x * y)
        eta = DifferentialForm.one_form(V2, [y, x])
        rel = classify_relation(phi, eta)
        assert rel.verdict == "identical"
        assert rel.residual.is_structurally_zero()

    def test_nonidentical_commutator(self):
        phi = DifferentialForm.scalar(V2, x * y)
        eta = DifferentialForm.one_form(V2, [y, ZERO])
        rel = classify_relation(phi, eta)
        assert rel.verdict == "nonidentical"
        assert rel.eta_commutator.components[(1, 2)] == const(-1)

    def test_nonidentical_residual_only(self):
        """Closed eta that is not d(phi): zero commutator, nonzero residual."""
        phi = DifferentialForm.scalar(V2, x)
        eta = DifferentialForm.one_form(V2, [y, x])  # closed, but != dx
        rel = classify_relation(phi, eta)
        assert rel.verdict == "nonidentical"
        assert rel.eta_commutator.zero_verdict() == "zero"
        assert not rel.residual.is_structurally_zero()

    def test_degree_mismatch(self):
        with pytest.raises(AnalysisError):
            classify_relation(DifferentialForm.scalar(V2, x),
                              DifferentialForm(V2, 2, {(1, 2): ONE}))

    def test_random_identities(self, rng):
        for _ in range(20):
            f = random_polynomial(rng, ("x", "y"))
            phi = DifferentialForm.scalar(V2, f)
            assert classify_relation(phi, exterior_derivative(phi)).verdict == "identical"
            spoiled = exterior_derivative(phi) + DifferentialForm(V2, 1, {(1,): y})
            assert classify_relation(phi, spoiled).verdict == "nonidentical"


class TestFrobenius:
    def test_contact_form(self):
        a = DifferentialForm.one_form(V3, [-y, ZERO, ONE])  # dz - y dx
        assert frobenius_test(a) == "nonintegrable"

    def test_radial_closed(self):
        a = DifferentialForm.one_form(V3, [x, y, z])
        assert frobenius_test(a) == "integrable"

    def test_z_dz(self):
        a = DifferentialForm.one_form(V3, [ZERO, ZERO, z])
        assert frobenius_test(a) == "integrable"

    def test_integrable_but_unclosed(self):
        # z dz + z dx has dw = dz^dx, w^dw = 0? w = z dx + z dz:
        # dw = dz^dx; w^dw = z dz^dz^dx + z dx^dz^dx = 0
        a = DifferentialForm.one_form(V3, [z, ZERO, z])
        assert frobenius_test(a) == "integrable"
        assert zero_verdict(exterior_derivative(a)) == "nonzero"

    def test_preconditions(self):
        with pytest.raises(AnalysisError):
            frobenius_test(DifferentialForm.one_form(V2, [x, y]))
        with pytest.raises(AnalysisError):
            frobenius_test(DifferentialForm.scalar(V3, x))

    def test_closed_forms_always_integrable(self, rng):
        for n in (3, 4):
            vs = VARSETS[n]
            for _ in range(10):
                f = random_polynomial(rng, vs.names)
                a = exterior_derivative(DifferentialForm.scalar(vs, f))
                assert frobenius_test(a) == "integrable"


class TestCharacteristicCurve:
    def test_line(self):
        pts = characteristic_curve(x + y, V2, (1.0, 0.0), steps=100, h=1e-2)
        for px, py in pts:
            assert abs(px + py - 1.0) < 1e-9

    def test_circle(self):
        pts = characteristic_curve(x**2 + y**2, V2, (1.0, 0.0), steps=1000, h=1e-3)
        drift = max(abs(px**2 + py**2 - 1.0) for px, py in pts)
        assert drift < 1e-9

    def test_hyperbola(self):
        pts = characteristic_curve(x * y, V2, (2.0, 0.5), steps=1000, h=1e-3)
        drift = max(abs(px * py - 1.0) for px, py in pts)
        assert drift < 1e-9

    def test_critical_point_truncates(self):
        pts = characteristic_curve(x**2 + y**2, V2, (0.0, 0.0), steps=100, h=1e-3)
        assert len(pts) == 1  # gradient vanishes at the start

    def test_dimension_check(self):
        with pytest.raises(AnalysisError):
            characteristic_curve(x, V3, (0.0, 0.0, 0.0))


class TestPseudostructure:
    def test_hyperplane_locus(self):
        xi = VariableSet(["xi1", "xi2"])
        xi1, xi2 = var("xi1"), var("xi2")
        a = DifferentialForm.one_form(xi, [xi2**2, xi1 * xi2])
        rep = find_pseudostructure(a, Metric.euclidean(xi), BOX2, 101)
        assert rep.locus.kind == "hyperplane"
        assert rep.locus.hyperplane == ("xi2", 0.0)
        K = commutator(a)
        for p in rep.locus.points:
            point = dict(zip(xi.names, p))
            assert all(abs(evaluate(c, point)) < 1e-6 for c in K.components.values())
        assert rep.intensity == pytest.approx(0.02, abs=1e-12)
        assert rep.restricted_form.is_structurally_zero()
        assert classify_closure(rep.restricted_form).closed == "closed"

    def test_closed_everywhere(self):
        a = DifferentialForm.one_form(V2, [2 * x, 2 * y])
        rep = find_pseudostructure(a, Metric.euclidean(V2), BOX2, 21)
        assert rep.locus.kind == "whole_box"
        assert rep.intensity == 0.0

    def test_constant_commutator_empty(self):
        a = DifferentialForm.one_form(V2, [y, ZERO])
        rep = find_pseudostructure(a, Metric.euclidean(V2), BOX2, 21)
        assert rep.locus.kind == "empty"
        assert rep.locus.description == "no structure realized"

    def test_sign_change_locus_points(self):
        """Nonaligned zero set: found numerically by bisection, |K| <= tol."""
        a = DifferentialForm.one_form(V2, [ZERO, (x - y) * x + x])
        # K_12 = d/dx((x-y)x + x) = 2x - y + 1, a slanted line
        rep = find_pseudostructure(a, Metric.euclidean(V2), BOX2, 41, tol=1e-6)
        assert rep.locus.kind == "points"
        assert rep.locus.points
        K = commutator(a)
        for p in rep.locus.points:
            point = dict(zip(V2.names, p))
            assert all(abs(evaluate(c, point)) <= 1e-6 for c in K.components.values())

    def test_3d_scan(self):
        a = DifferentialForm.one_form(V3, [z * y, ZERO, ZERO])
        # K_12 = -z, K_13 = -y, K_23 = 0: common zero locus is the x-axis
        rep = find_pseudostructure(a, Metric.euclidean(V3),
                                   [(-1, 1)] * 3, 11)
        assert rep.locus.points
        for p in rep.locus.points:
            assert abs(p[1]) <= 1e-6 and abs(p[2]) <= 1e-6

    def test_preconditions(self):
        with pytest.raises(AnalysisError):
            find_pseudostructure(DifferentialForm.scalar(V2, x),
                                 Metric.euclidean(V2), BOX2, 11)
        with pytest.raises(AnalysisError):
            find_pseudostructure(DifferentialForm.one_form(V2, [x, y]),
                                 Metric.euclidean(V2), BOX2, 2)


class TestStokes:
    def test_x_dy_unit_square(self):
        a = DifferentialForm.one_form(V2, [ZERO, x])
        boundary, area, diff = stokes_check(a, (0, 1, 0, 1))
        assert boundary == pytest.approx(1.0, abs=1e-12)
        assert area == pytest.approx(1.0, abs=1e-12)
        assert diff < 1e-8

    def test_y_dx_unit_square(self):
        a = DifferentialForm.one_form(V2, [y, ZERO])
        boundary, area, diff = stokes_check(a, (0, 1, 0, 1))
        assert boundary == pytest.approx(-1.0, abs=1e-12)
        assert diff < 1e-8

    def test_exact_form_boundary_zero(self, rng):
        for _ in range(5):
            f = random_polynomial(rng, ("x", "y"))
            a = DifferentialForm.one_form(V2, [differentiate(f, "x"), differentiate(f, "y")])
            boundary, _, _ = stokes_check(a, (-0.5, 1.5, 0.0, 2.0))
            assert abs(boundary) < 1e-8

    def test_random_polynomial_forms(self, rng):
        for _ in range(20):
            a = random_form(rng, V2, 1)
            _, _, diff = stokes_check(a, (0, 1, 0, 1))
            assert diff < 1e-8

    def test_bad_rectangle(self):
        a = DifferentialForm.one_form(V2, [y, ZERO])
        with pytest.raises(AnalysisError):
            stokes_check(a, (1, 0, 0, 1))


class TestClassificationTable:
    def test_paper_rows(self):
        assert classification_table(1, 2) == [(1, 2), (0, 3)]
        assert classification_table(0, 3) == [(0, 4)]
        assert classification_table(3, 3) == [(3, 1), (2, 2), (1, 3), (0, 4)]

    def test_formula_everywhere(self):
        for p in range(4):
            for n in range(1, 5):
                rows = classification_table(p, n)
                assert rows == [(k, n + 1 - k) for k in range(p, -1, -1)]

    def test_bounds(self):
        with pytest.raises(AnalysisError):
            classification_table(4, 2)
        with pytest.raises(AnalysisError):
            classification_table(1, 0)


class TestJacobianDeterminant:
    def test_identity_map(self):
        from skewforms.analysis import jacobian_determinant
        assert jacobian_determinant([x, y], V2) == ONE

    def test_degeneracy_locus(self):
        from skewforms.analysis import jacobian_determinant
        det = jacobian_determinant([x**2, y], V2)
        assert det == 2 * x  # degenerates on x = 0

    def test_linear_map(self):
        from skewforms.analysis import jacobian_determinant
        det = jacobian_determinant([2 * x + y, x - y], V2)
        assert det == const(-3)

    def test_three_dimensional(self):
        from skewforms.analysis import jacobian_determinant
        det = jacobian_determinant([x * y, y * z, z * x], V3)
        assert det == 2 * x * y * z

    def test_shape_check(self):
        from skewforms.analysis import jacobian_determinant
        with pytest.raises(AnalysisError):
            jacobian_determinant([x], V2)


class TestPotentialHelpers:
    def test_origin_centered(self):
        a = DifferentialForm.one_form(V2, [y, x])
        assert reconstruct_potential(a) == x * y

    def test_nonpolynomial_returns_none(self):
        a = DifferentialForm.one_form(V2, [sin(y), ZERO])
        assert reconstruct_potential(a) is None

    def test_requires_one_form(self):
        with pytest.raises(AnalysisError):
            reconstruct_potential(DifferentialForm.scalar(V2, x))
