"""Function-space constructors: products, prescribed jets, bumps."""

import math

import pytest

from opident.errors import EvalDomainError, StructuralError
from opident.functions import (
    Domain,
    fn_bump,
    fn_constant,
    fn_exp_of,
    fn_from_expr,
    fn_from_jet,
    fn_monomial,
    fn_product,
    fn_scale_add,
    fn_sum,
)

E = math.e


class TestDomain:
    def test_contains_is_strict(self):
        d = Domain(((0.0, 1.0),))
        assert d.contains(0.5)
        assert not d.contains(0.0)
        assert not d.contains(1.0)

    def test_eval_at_endpoint_is_error(self):
        f = fn_from_expr("x^2", Domain(((0.0, 1.0),)))
        with pytest.raises(EvalDomainError):
            f.eval_jet(1.0, 1)

    def test_rejects_empty_interval(self):
        with pytest.raises(StructuralError):
            Domain(((1.0, 1.0),))

    def test_rejects_overlap(self):
        with pytest.raises(StructuralError):
            Domain(((0.0, 2.0), (1.0, 3.0)))

    def test_intersection(self):
        d = Domain(((0.0, 2.0),)).intersect(Domain(((1.0, 3.0),)))
        assert d.intervals == ((1.0, 2.0),)

    def test_empty_intersection_is_error(self):
        with pytest.raises(StructuralError):
            Domain(((0.0, 1.0),)).intersect(Domain(((2.0, 3.0),)))


class TestProduct:
    def test_x_times_x_squared(self):
        f = fn_product([fn_from_expr("x"), fn_from_expr("x^2")])
        assert f.eval_jet(1.0, 2).derivs == (1.0, 3.0, 6.0)

    def test_one_is_identity(self):
        g = fn_from_expr("x^2-1")
        f = fn_product([g, fn_constant(1.0)])
        for x in (-0.5, 0.3, 2.0):
            assert f.eval_jet(x, 3) == g.eval_jet(x, 3)

    def test_all_ones(self):
        f = fn_product([fn_constant(1.0)] * 4)
        assert f.eval_jet(0.7, 5).derivs == (1.0,) + (0.0,) * 5

    def test_empty_is_structural_error(self):
        with pytest.raises(StructuralError):
            fn_product([])

    def test_order_does_not_matter(self):
        f = fn_from_expr("sin(x)")
        g = fn_from_expr("exp(x)+x")
        fg = fn_product([f, g])
        gf = fn_product([g, f])
        for x in (-1.0, 0.25, 1.5):
            assert fg.eval_jet(x, 4) == gf.eval_jet(x, 4)


class TestFromJet:
    def test_zero(self):
        f = fn_from_jet(0.0, [0.0, 0.0, 0.0])
        assert f.is_zero
        assert f.eval_jet(1.3, 2).derivs == (0.0, 0.0, 0.0)

    def test_prescribed_jet_roundtrip_exact(self):
        v = [1.0, 2.0, 2.0]
        f = fn_from_jet(0.0, v)
        assert f.eval_jet(0.0, 2).derivs == tuple(v)
        # p(x) = 1 + 2x + x^2
        assert f.eval_jet(2.0, 0).value == 9.0

    def test_linear_case(self):
        f = fn_from_jet(3.0, [0.0, 1.0])
        assert f.eval_jet(5.0, 0).value == 2.0

    def test_roundtrip_high_order(self):
        v = [0.5, -1.0, 3.0, 2.0, -0.25]
        f = fn_from_jet(-0.7, v)
        assert f.eval_jet(-0.7, 4).derivs == tuple(v)


class TestBump:
    def test_plateau_jet(self):
        f = fn_bump((0.0, 3.0), (1.0, 2.0))
        assert f.eval_jet(1.5, 4).derivs == (1.0, 0.0, 0.0, 0.0, 0.0)

    def test_outside_support(self):
        f = fn_bump((0.0, 3.0), (1.0, 2.0))
        assert f.eval_jet(-1.0, 4).derivs == (0.0,) * 5
        assert f.eval_jet(5.0, 2).derivs == (0.0,) * 3

    def test_range(self):
        f = fn_bump((0.0, 3.0), (1.0, 2.0))
        for i in range(101):
            x = -0.5 + 4.0 * i / 100
            v = f.eval_jet(x, 0).value
            assert 0.0 <= v <= 1.0

    def test_bad_plateau(self):
        with pytest.raises(StructuralError):
            fn_bump((0.0, 1.0), (0.0, 0.5))

    def test_first_derivative_matches_finite_difference(self):
        f = fn_bump((0.0, 3.0), (1.0, 2.0))
        h = 1e-6
        for i in range(1, 100):
            x = 3.0 * i / 100
            fd = (f.eval_jet(x + h, 0).value - f.eval_jet(x - h, 0).value) / (2 * h)
            assert abs(fd - f.eval_jet(x, 1).derivs[1]) < 1e-4

    def test_continuity_at_joints(self):
        f = fn_bump((0.0, 3.0), (1.0, 2.0))
        for joint in (0.0, 1.0, 2.0, 3.0):
            near = [joint - 1e-9, joint + 1e-9]
            vals = [f.eval_jet(x, 0).value for x in near]
            ref = f.eval_jet(joint, 0).value if 0.0 < joint < 3.0 else 0.0
            for v in vals:
                assert abs(v - ref) < 1e-6


class TestCombinators:
    def test_exp_of_zero(self):
        f = fn_exp_of(fn_constant(0.0))
        assert f.eval_jet(0.3, 3).derivs == (1.0, 0.0, 0.0, 0.0)

    def test_constant_minus_one(self):
        f = fn_constant(-1.0)
        assert f.eval_jet(0.0, 3).derivs == (-1.0, 0.0, 0.0, 0.0)

    def test_exp_of_x_squared(self):
        f = fn_exp_of(fn_from_expr("x^2"))
        j = f.eval_jet(1.0, 2)
        assert math.isclose(j.derivs[0], E, rel_tol=1e-14)
        assert math.isclose(j.derivs[1], 2 * E, rel_tol=1e-14)
        assert math.isclose(j.derivs[2], 6 * E, rel_tol=1e-14)

    def test_scale_add(self):
        f = fn_scale_add(2.0, fn_from_expr("x"), -3.0, fn_constant(1.0))
        assert f.eval_jet(2.0, 1).derivs == (1.0, 2.0)

    def test_scale_add_zero_detection(self):
        z = fn_scale_add(0.0, fn_from_expr("x"), 1.0, fn_constant(0.0))
        assert z.is_zero

    def test_sum(self):
        f = fn_sum([fn_from_expr("x"), fn_from_expr("x^2"), fn_constant(1.0)])
        assert f.eval_jet(2.0, 2).derivs == (7.0, 5.0, 2.0)

    def test_monomial(self):
        f = fn_monomial(3)
        assert f.descriptor == "x^3"
        assert f.eval_jet(2.0, 4).derivs == (8.0, 12.0, 12.0, 6.0, 0.0)
        assert fn_monomial(0).eval_jet(1.0, 2).derivs == (1.0, 0.0, 0.0)

    def test_jet_consistency(self):
        f = fn_exp_of(fn_from_expr("sin(x)+x^2"))
        full = f.eval_jet(0.4, 6)
        for k in range(6):
            assert f.eval_jet(0.4, k).derivs == full.derivs[: k + 1]

    def test_determinism(self):
        f = fn_from_expr("exp(x)*sin(x)")
        assert f.eval_jet(0.9, 5) == f.eval_jet(0.9, 5)
