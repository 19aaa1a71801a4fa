"""Standard verification batteries, shared by the CLI selftest and the
acceptance tests.

Every battery returns ResidualReport records with the uniform schema, so a
run is a flat list of records and "all pass" is the single exit criterion.
Detection-style checks (a violator must be caught) are encoded as records
whose residual is 0.0 when detection succeeded.
"""

from __future__ import annotations

import math
import random
from typing import Sequence

from . import exprs
from .errors import ParseError
from .functions import (
    fn_bump,
    fn_constant,
    fn_from_expr,
    fn_scale_add,
)
from .identities import (
    ResidualReport,
    SamplingConfig,
    _Aggregator,
    alternating_subset_residual,
    check_localization,
    check_poly_annihilation,
    check_units,
    default_grid,
    random_function,
    random_polynomial,
    run_check_suite_full,
)
from .jets import Jet, jet_ln_abs
from .logderiv import enumerate_partition_multisets, log_deriv_via_partitions
from .multiadd import (
    conjugate_exp,
    frechet_degree_residual,
    frechet_degree_terms,
)
from .operators import (
    BlackBoxOp,
    CanonicalOp,
    apply,
    builtin_blackbox,
    derivative_op,
    entropy_op,
    linear_op,
)
from .recovery import recover_profile, validate_recovery

E = math.e
WITNESS_VALUE = E * E - 2 * E + 1  # two-fold difference of the exp probe


def random_canonical_op(rng: random.Random, n: int) -> CanonicalOp:
    return CanonicalOp(
        n,
        [random_polynomial(rng, 2) for _ in range(n)],
        [random_polynomial(rng, 2) for _ in range(n)],
    )


def _ratio(report: ResidualReport) -> float:
    bound = report.tol_abs + report.tol_rel * report.max_scale
    if bound > 0.0:
        return report.max_abs_residual / bound
    return 0.0 if report.max_abs_residual == 0.0 else math.inf


def merge_reports(
    name: str, n: int, reports: Sequence[ResidualReport], tol_abs: float, tol_rel: float
) -> ResidualReport:
    """Merge per-run reports so that the merged record passes iff every
    component passed: the record carries the (residual, scale) pair of the
    run with the worst scaled violation."""
    samples = sum(r.samples for r in reports)
    if not reports or samples == 0:
        return ResidualReport(name, n, samples, 0.0, 0.0, None, tol_abs, tol_rel, True)
    worst = max(reports, key=_ratio)
    return ResidualReport(
        name,
        n,
        samples,
        worst.max_abs_residual,
        worst.max_scale,
        worst.worst_case,
        tol_abs,
        tol_rel,
    )


def detection_record(name: str, detected: bool, n: int = 0) -> ResidualReport:
    """Record that passes exactly when a violation was caught."""
    return ResidualReport(
        name, n, 1, 0.0 if detected else 1.0, 0.0, None, 0.0, 0.0
    )


def converse_battery(
    seed: int = 42,
    n_values: Sequence[int] = (1, 2, 3, 4),
    ops_per_n: int = 100,
    tuples_per_op: int = 10,
    grid_points: int = 21,
    include_diagonal: bool = True,
) -> list[ResidualReport]:
    """Random canonical operators must satisfy the subset identity: per n,
    ops_per_n operators × tuples_per_op random tuples × a grid. Emits one
    merged identity record per n and, when include_diagonal is set, one
    merged diagonal-consistency record per n."""
    rng = random.Random(seed)
    records = []
    grid = default_grid(grid_points)
    for n in n_values:
        identity_reports = []
        gap_reports = []
        for _ in range(ops_per_n):
            op = random_canonical_op(rng, n)
            cfg = SamplingConfig(
                seed=rng.randrange(2**32),
                tuples=tuples_per_op,
                grid=grid,
                include_diagonal=include_diagonal,
            )
            outcome = run_check_suite_full(op, n, cfg)
            identity_reports.append(outcome.report)
            if outcome.diagonal_gap is not None:
                gap_reports.append(outcome.diagonal_gap)
        records.append(
            merge_reports(f"converse-identity-n{n}", n, identity_reports, 1e-9, 1e-8)
        )
        if include_diagonal:
            records.append(
                merge_reports(f"diagonal-consistency-n{n}", n, gap_reports, 0.0, 1e-12)
            )
    return records


def counterexample_battery(seed: int = 42) -> list[ResidualReport]:
    """The square black box must produce the known residual -1 at the pinned
    probe and must fail the random suite."""
    sq = builtin_blackbox("square")
    x_fn = fn_from_expr("x")
    value = alternating_subset_residual(sq, [x_fn, x_fn], 1.0)
    pinned = ResidualReport(
        "counterexample-square-value",
        1,
        1,
        abs(value - (-1.0)),
        1.0,
        None,
        1e-12,
        0.0,
    )
    suite = run_check_suite_full(
        sq, 1, SamplingConfig(seed=seed, tuples=10, include_diagonal=False)
    )
    return [
        pinned,
        detection_record("counterexample-square-detected", not suite.report.passed, 1),
    ]


def logderiv_battery(
    seed: int = 42, trials: int = 100, max_k: int = 8
) -> list[ResidualReport]:
    """Partition-sum log derivatives against the jet recurrence, plus the
    partition counts against a brute-force enumeration."""
    rng = random.Random(seed)
    agg = _Aggregator()
    for _ in range(trials):
        k = rng.randint(1, max_k)
        value = rng.uniform(0.1, 3.0) * rng.choice((-1.0, 1.0))
        fjet = Jet(0.0, [value] + [rng.uniform(-3.0, 3.0) for _ in range(k)])
        want = jet_ln_abs(fjet).derivs[k]
        got = log_deriv_via_partitions(fjet, k)
        rel = abs(got - want) / max(abs(got), abs(want), 1e-12)
        agg.add(rel, 1.0, value, (f"k={k}",))
    records = [agg.report("logderiv-crosscheck", 0, 1e-8, 0.0)]

    expected_counts = (1, 2, 3, 5, 7, 11, 15, 22)
    brute = [_brute_force_partition_count(k) for k in range(1, 9)]
    enumerated = [len(enumerate_partition_multisets(k)) for k in range(1, 9)]
    ok = tuple(brute) == expected_counts and tuple(enumerated) == expected_counts
    records.append(detection_record("partition-counts", ok))
    return records


def _brute_force_partition_count(k: int) -> int:
    count = 0

    def rec(remaining: int, max_part: int) -> None:
        nonlocal count
        if remaining == 0:
            count += 1
            return
        for part in range(1, min(remaining, max_part) + 1):
            rec(remaining - part, part)

    rec(k, k)
    return count


def units_battery(seed: int = 42, ops: int = 20) -> list[ResidualReport]:
    """D(1) = D(-1) = 0 exactly; localization on agreeing subintervals; the
    alternating binomial identity behind both."""
    rng = random.Random(seed)
    grid = default_grid(7)
    unit_reports = []
    local_reports = []
    fixed = [derivative_op(1), derivative_op(2), derivative_op(3), entropy_op()]
    for op in fixed + [random_canonical_op(rng, rng.randint(1, 4)) for _ in range(ops)]:
        unit_reports.append(check_units(op, grid))
        if isinstance(op, CanonicalOp) or op.descriptor.startswith("d"):
            f1 = random_function(rng)
            bump = fn_bump((2.0, 4.0), (2.5, 3.5))
            f2 = fn_scale_add(1.0, f1, 1.0, bump)
            local_reports.append(
                check_localization(op, f1, f2, (-1.0, 1.0), grid)
            )
    records = [
        merge_reports("units-exact", 0, unit_reports, 0.0, 0.0),
        merge_reports("localization", 0, local_reports, 1e-12, 0.0),
    ]
    binomial_ok = all(
        sum((-1) ** i * math.comb(n + 1, i) for i in range(n + 1)) == (-1) ** n
        for n in range(13)
    )
    records.append(detection_record("alternating-binomial-identity", binomial_ok))
    return records


def recovery_battery(
    seed: int = 42, ops: int = 50, grid_points: int = 5
) -> list[ResidualReport]:
    """Round-trip recovery on random canonical operators, holdout
    validation, and misfit detection for the square black box."""
    rng = random.Random(seed)
    holdout = [
        fn_from_expr("sin(x)"),
        fn_from_expr("x^3"),
        fn_from_expr("x*exp(x)"),
    ]
    grid = default_grid(grid_points, -0.8, 0.8)
    coeff_agg = _Aggregator()
    validation_reports = []
    for _ in range(ops):
        n = rng.randint(1, 4)
        op = random_canonical_op(rng, n)
        profile = recover_profile(op, n, grid)
        for x, c_row, d_row in zip(profile.grid, profile.c_rows, profile.d_rows):
            if c_row is None:
                coeff_agg.add(math.inf, 1.0, x, (op.descriptor, "recovery failed"))
                continue
            for i in range(n):
                for rec, true in ((c_row[i], op.c[i].value_at(x)),
                                  (d_row[i], op.d[i].value_at(x))):
                    dev = abs(rec - true) / (1.0 + abs(true))
                    coeff_agg.add(dev, 1.0, x, (op.descriptor,))
        validation_reports.append(validate_recovery(op, profile, holdout))
    records = [
        coeff_agg.report("recovery-roundtrip", 0, 1e-6, 0.0),
        merge_reports("recovery-holdout", 0, validation_reports, 1e-9, 1e-6),
    ]
    sq = builtin_blackbox("square")
    sq_profile = recover_profile(sq, 1, grid)
    sq_report = validate_recovery(sq, sq_profile, holdout)
    records.append(detection_record("recovery-square-misfit", not sq_report.passed, 1))
    return records


def frechet_battery(seed: int = 42, ops: int = 15) -> list[ResidualReport]:
    """(n+1)-fold differences of exp-conjugated canonical operators vanish;
    the exp probe is the standard non-polynomial witness."""
    rng = random.Random(seed)
    agg = _Aggregator()
    for _ in range(ops):
        n = rng.randint(1, 3)
        op = random_canonical_op(rng, n)
        P = conjugate_exp(op)
        g = random_polynomial(rng, 2)
        hs = [random_polynomial(rng, 2) for _ in range(n + 1)]
        for x in (-0.5, 0.0, 0.5):
            terms = frechet_degree_terms(P, g, hs, x)
            scale = max(abs(t) for t in terms)
            agg.add(sum(terms), scale, x, (op.descriptor,))
    records = [agg.report("frechet-degree", 0, 0.0, 1e-6)]

    probe = BlackBoxOp(lambda g, x: math.exp(g.value_at(x)), "g -> exp(g(x))")
    witness = frechet_degree_residual(
        probe, fn_constant(0.0), [fn_constant(1.0), fn_constant(1.0)], 0.0
    )
    records.append(
        ResidualReport(
            "frechet-witness",
            1,
            1,
            abs(witness - WITNESS_VALUE),
            WITNESS_VALUE,
            None,
            1e-9,
            0.0,
        )
    )
    return records


def annihilation_battery(seed: int = 42) -> list[ResidualReport]:
    """Operators with the low derivative coefficients zeroed annihilate
    monomials up to that degree exactly; d/dx must fail the j=1 case."""
    rng = random.Random(seed)
    grid = default_grid(7)
    reports = []
    for j in (0, 1, 2):
        for _ in range(5):
            n = rng.randint(j + 1, 4)
            coeffs = [fn_constant(0.0)] * j + [
                random_polynomial(rng, 2) for _ in range(n - j)
            ]
            op = linear_op(coeffs)
            reports.append(check_poly_annihilation(op, j, grid))
    records = [merge_reports("annihilation-exact", 0, reports, 0.0, 0.0)]
    ddx = check_poly_annihilation(derivative_op(1), 1, grid)
    records.append(detection_record("annihilation-detects-ddx", not ddx.passed))
    return records


PARSER_GOLDEN: list[tuple[str, str]] = [
    ("x^2 + 1", "x^2+1"),
    ("sin(x)*exp(x)", "sin(x)*exp(x)"),
    ("-x^2", "-x^2"),
    ("--x", "--x"),
    ("1+2*3", "1+2*3"),
    ("(1+x)*3", "(1+x)*3"),
    ("1-2-3", "1-2-3"),
    ("8/2/2", "8/2/2"),
    ("abs(x-2)", "abs(x-2)"),
    ("ln(exp(x))", "ln(exp(x))"),
    ("cos(x)^2", "cos(x)^2"),
    ("x^2.5", "x^2.5"),
    ("2*-x", "2*-x"),
    ("exp(x^2)", "exp(x^2)"),
    ("  x  ", "x"),
    ("3.5e-2", "0.035"),
]

PARSER_ERRORS: list[tuple[str, int]] = [
    ("2*(x", 4),
    ("2x", 1),
    ("x^-2", 2),
    ("sin x", 4),
    ("y+1", 0),
    ("", 0),
    ("x +", 3),
    ("1..2", 1),
    ("x^(2)", 2),
    ("()", 1),
]


def parser_battery(seed: int = 42, roundtrips: int = 200) -> list[ResidualReport]:
    """Grammar golden cases (incl. error offsets) and random print/parse
    round trips."""
    failures = 0
    for source, printed in PARSER_GOLDEN:
        try:
            tree = exprs.parse(source)
            if exprs.to_text(tree) != printed or exprs.parse(printed) != tree:
                failures += 1
        except ParseError:
            failures += 1
    for source, offset in PARSER_ERRORS:
        try:
            exprs.parse(source)
            failures += 1
        except ParseError as err:
            if err.offset != offset:
                failures += 1
    rng = random.Random(seed)
    for _ in range(roundtrips):
        tree = _random_ast(rng, rng.randint(1, 5))
        if exprs.parse(exprs.to_text(tree)) != tree:
            failures += 1
    return [
        ResidualReport(
            "parser-conformance",
            0,
            len(PARSER_GOLDEN) + len(PARSER_ERRORS) + roundtrips,
            float(failures),
            0.0,
            None,
            0.0,
            0.0,
        )
    ]


def _random_ast(rng: random.Random, depth: int) -> exprs.Expr:
    if depth <= 0:
        return rng.choice(
            [
                exprs.Var(),
                exprs.Const(float(rng.randint(0, 9))),
                exprs.Const(round(rng.uniform(0, 5), 3)),
            ]
        )
    kind = rng.randrange(6)
    if kind == 0:
        return exprs.Neg(_random_ast(rng, depth - 1))
    if kind == 1:
        return exprs.Func(
            rng.choice(("sin", "cos", "exp", "ln", "abs")),
            _random_ast(rng, depth - 1),
        )
    if kind == 2:
        return exprs.Pow(
            _random_ast(rng, depth - 1), float(rng.choice((0, 1, 2, 3, 0.5, 2.5)))
        )
    if kind in (3, 4):
        return exprs.BinOp(
            rng.choice("+-*/"),
            _random_ast(rng, depth - 1),
            _random_ast(rng, depth - 1),
        )
    return _random_ast(rng, depth - 1)


def selftest(seed: int = 42, fast: bool = False) -> list[ResidualReport]:
    """The full standard battery at one seed. `fast` shrinks sample counts
    for smoke testing; the acceptance-scale run keeps the defaults."""
    scale = 10 if fast else 1
    records = []
    records += converse_battery(
        seed,
        ops_per_n=max(1, 100 // scale),
        tuples_per_op=max(1, 10 // (2 if fast else 1)),
    )
    records += counterexample_battery(seed)
    records += logderiv_battery(seed, trials=max(10, 100 // scale))
    records += units_battery(seed, ops=max(2, 20 // scale))
    records += recovery_battery(seed, ops=max(2, 50 // scale))
    records += frechet_battery(seed, ops=max(2, 15 // scale))
    records += annihilation_battery(seed)
    records += parser_battery(seed, roundtrips=max(20, 200 // scale))
    return records
