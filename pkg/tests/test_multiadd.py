"""Exp-conjugation, iterated differences, and degree probes."""

import itertools
import math
import random

import pytest

from opident.functions import (
    fn_constant,
    fn_from_expr,
    fn_from_jet,
)
from opident.identities import (
    alternating_power_residual,
    random_function,
    random_polynomial,
)
from opident.multiadd import (
    FnPerturbation,
    conjugate_exp,
    difference_terms,
    frechet_degree_residual,
    frechet_degree_terms,
    iterated_difference,
    jet_response,
    multiadditive_form_terms,
    multiadditive_form_value,
)
from opident.operators import (
    BlackBoxOp,
    CanonicalOp,
    apply,
    builtin_blackbox,
    derivative_op,
    entropy_op,
    linear_op,
)

E = math.e


def random_canonical(rng, n):
    return CanonicalOp(
        n,
        [random_polynomial(rng, 2) for _ in range(n)],
        [random_polynomial(rng, 2) for _ in range(n)],
    )


class TestConjugateExp:
    def test_first_derivative_becomes_slope_reader(self):
        P = conjugate_exp(derivative_op(1))
        g = fn_from_expr("x^2-x")
        for x in (-0.5, 0.3, 1.0):
            assert math.isclose(
                apply(P, g, x), 2 * x - 1, rel_tol=1e-12, abs_tol=1e-12
            )

    def test_second_derivative(self):
        # P(g) = g'' + (g')^2; at g=x^2, x=1: 2 + 4 = 6
        P = conjugate_exp(derivative_op(2))
        got = apply(P, fn_from_expr("x^2"), 1.0)
        assert math.isclose(got, 6.0, rel_tol=1e-12)

    def test_entropy_conjugates_to_identity(self):
        P = conjugate_exp(entropy_op())
        g = fn_from_expr("sin(x)+x")
        for x in (-1.0, 0.0, 0.8):
            assert math.isclose(
                apply(P, g, x), g.value_at(x), rel_tol=1e-12, abs_tol=1e-12
            )


class TestIteratedDifference:
    def test_empty_returns_same_operator(self):
        op = derivative_op(1)
        assert iterated_difference(op, FnPerturbation(())) is op

    def test_single_difference_of_linear_op(self):
        op = derivative_op(1)
        h = fn_from_expr("x^2")
        diff = iterated_difference(op, [h])
        for f in (fn_from_expr("sin(x)"), fn_from_expr("exp(x)")):
            for x in (0.2, 1.0):
                got = apply(diff, f, x)
                want = apply(op, h, x)  # T(f+h)-T(f) = T(h) by additivity
                assert math.isclose(got, want, rel_tol=1e-11, abs_tol=1e-11)

    def test_double_difference_of_square(self):
        sq = builtin_blackbox("square")
        h = fn_from_expr("x+1")
        diff = iterated_difference(sq, [h, h])
        for f in (fn_from_expr("x^2"), fn_constant(3.0)):
            for x in (0.0, 0.7):
                want = 2.0 * h.value_at(x) ** 2
                assert math.isclose(apply(diff, f, x), want, rel_tol=1e-12)

    def test_terms_count(self):
        op = derivative_op(1)
        hs = [fn_constant(1.0)] * 3
        assert len(difference_terms(op, fn_constant(0.0), hs, 0.0)) == 8


class TestMultiadditiveForm:
    def test_permutation_symmetry_exact(self):
        rng = random.Random(61)
        op = random_canonical(rng, 2)
        fs = [random_function(rng) for _ in range(3)]
        x = 0.4
        base = multiadditive_form_value(op, fs, x)
        for perm in itertools.permutations(fs):
            assert multiadditive_form_value(op, list(perm), x) == base

    def test_slot_additivity_for_linear_ops(self):
        rng = random.Random(62)
        for _ in range(10):
            n = rng.randint(1, 3)
            op = linear_op([random_polynomial(rng, 2) for _ in range(n)])
            rest = [random_function(rng) for _ in range(n)]
            f, g = random_function(rng), random_function(rng)
            from opident.functions import fn_scale_add

            x = rng.uniform(-1, 1)
            joint = multiadditive_form_value(op, [fn_scale_add(1, f, 1, g)] + rest, x)
            split = multiadditive_form_value(op, [f] + rest, x) + multiadditive_form_value(
                op, [g] + rest, x
            )
            scale = max(
                abs(t)
                for t in multiadditive_form_terms(op, [fn_scale_add(1, f, 1, g)] + rest, x)
            )
            assert abs(joint - split) <= 1e-10 * max(1.0, scale)

    def test_diagonal_equals_power_residual(self):
        rng = random.Random(63)
        op = random_canonical(rng, 2)
        f = random_function(rng)
        x = 0.1
        diag = multiadditive_form_value(op, (f, f, f), x)
        single = alternating_power_residual(op, f, 2, x)
        assert math.isclose(diag, single, rel_tol=1e-10, abs_tol=1e-10)

    def test_polarization_shadow(self):
        # linear-form ops kill the diagonal identity on probes, and the full
        # form then vanishes on tuples of distinct functions too
        rng = random.Random(64)
        for _ in range(5):
            n = rng.randint(1, 3)
            op = linear_op([random_polynomial(rng, 2) for _ in range(n)])
            x = rng.uniform(-1, 1)
            for _ in range(3):
                probe = random_function(rng)
                terms = alternating_power_residual(op, probe, n, x)
                assert abs(terms) <= 1e-8 * max(1.0, abs(apply(op, probe, x)))
            fs = [random_function(rng) for _ in range(n + 1)]
            value = multiadditive_form_value(op, fs, x)
            scale = max(abs(t) for t in multiadditive_form_terms(op, fs, x))
            assert abs(value) <= 1e-8 * max(1.0, scale)


class TestFrechetDegree:
    def test_additive_conjugate_two_fold(self):
        P = conjugate_exp(derivative_op(1))
        g = fn_from_expr("x^2")
        hs = [fn_from_expr("sin(x)"), fn_from_expr("x")]
        r = frechet_degree_residual(P, g, hs, 0.5)
        scale = max(abs(t) for t in frechet_degree_terms(P, g, hs, 0.5))
        assert abs(r) <= 1e-13 * max(1.0, scale)

    def test_quadratic_conjugate_three_fold(self):
        P = conjugate_exp(derivative_op(2))
        rng = random.Random(65)
        g = random_polynomial(rng, 3)
        hs = [random_polynomial(rng, 3) for _ in range(3)]
        r = frechet_degree_residual(P, g, hs, 0.3)
        scale = max(abs(t) for t in frechet_degree_terms(P, g, hs, 0.3))
        assert abs(r) <= 1e-8 * max(1.0, scale)

    def test_exp_probe_witness(self):
        # non-polynomial response: two-fold difference with unit increments
        # at g=0 expands to e^2 - 2e + 1
        P = BlackBoxOp(lambda g, x: math.exp(g.value_at(x)), "g -> exp(g(x))")
        hs = [fn_constant(1.0), fn_constant(1.0)]
        r = frechet_degree_residual(P, fn_constant(0.0), hs, 0.0)
        assert math.isclose(r, E * E - 2 * E + 1, rel_tol=0, abs_tol=1e-12)

    def test_degree_bound_with_witness_search(self):
        # order-n canonical with top coefficients present: (n+1)-fold
        # differences vanish, n-fold differences have a nonzero witness
        rng = random.Random(66)
        for n in (1, 2):
            op = CanonicalOp(
                n,
                [random_polynomial(rng, 1) for _ in range(n - 1)] + [fn_constant(1.0)],
                [fn_constant(0.0)] * (n - 1) + [fn_constant(1.0)],
            )
            P = conjugate_exp(op)
            x = 0.25
            g = random_polynomial(rng, 2)
            hs_full = [random_polynomial(rng, 2) for _ in range(n + 1)]
            r = frechet_degree_residual(P, g, hs_full, x)
            scale = max(abs(t) for t in frechet_degree_terms(P, g, hs_full, x))
            assert abs(r) <= 1e-6 * max(1.0, scale)

            found = False
            for _ in range(20):
                hs = [random_polynomial(rng, 2) for _ in range(n)]
                r = frechet_degree_residual(P, g, hs, x)
                scale = max(abs(t) for t in frechet_degree_terms(P, g, hs, x))
                if abs(r) > 10 * 1e-6 * max(1.0, scale):
                    found = True
                    break
            assert found, f"no degree-{n} witness found for order-{n} operator"


class TestJetResponse:
    def test_slope_reader(self):
        P = conjugate_exp(derivative_op(1))
        for a in (-1.0, 0.0, 2.0):
            assert math.isclose(
                jet_response(P, 0.5, [a, 3.0]), 3.0, rel_tol=1e-12
            )

    def test_quadratic_response(self):
        P = conjugate_exp(derivative_op(2))
        a, b, c = 0.7, -1.2, 0.4
        got = jet_response(P, 0.0, [a, b, c])
        assert math.isclose(got, c + b * b, rel_tol=1e-10, abs_tol=1e-12)

    def test_vspace_differences_vanish_for_canonical(self):
        # the response map in jet coordinates is polynomial of degree <= n:
        # (n+1)-fold finite differences along scaled basis directions vanish
        rng = random.Random(67)
        n = 2
        op = random_canonical(rng, n)
        P = conjugate_exp(op)
        x = 0.3
        v0 = [rng.uniform(-1, 1) for _ in range(n + 1)]
        steps = []
        for _ in range(n + 1):
            e = [0.0] * (n + 1)
            e[rng.randrange(n + 1)] = 0.5
            steps.append(e)
        total = 0.0
        scale = 0.0
        for mask in range(1 << (n + 1)):
            v = list(v0)
            for i in range(n + 1):
                if mask >> i & 1:
                    v = [a + b for a, b in zip(v, steps[i])]
            term = jet_response(P, x, v)
            sign = (-1) ** ((n + 1) - mask.bit_count())
            total += sign * term
            scale = max(scale, abs(term))
        assert abs(total) <= 1e-8 * max(1.0, scale)
