"""
V-monotone Moments Engine
Copyright (c) 2024 Carlos Manzanedo Rueda (@cmanaha)

Licensed under the MIT License (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://opensource.org/licenses/MIT
"""

import itertools
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from time import time
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
import sympy
from pydantic import BaseModel, Field

import mgf
from fock import a_pi_moment, decay_exponent, omega_N_moment, operator_moment
from labelings import (
    LabelingRule,
    count_ov,
    count_ov2,
    count_ov2_k,
    enumerate_adapted,
    enumerate_adapted_v,
    enumerate_onc,
    is_v_monotone,
)
from moments import (
    PRINTED_TABLE_NUMERATORS,
    MomentSpec,
    arcsine_moment,
    clt_moment,
    kappa_star,
    kappa_star_partition,
    mixed_moment_combinatorial,
    mixed_moment_recursive,
    moment_symbol,
    nk_recurrence,
    product_state_moment,
    universal_polynomial,
)
from partitions import LabeledPartition, Partition, enumerate_nc_pair
from polyengine import X, evaluate, p_q_of_partition, pn_qn, rat_poly
from reporting import CheckResult, RunReport

DEFAULT_SEED = 20240607


class VerifyConfig(BaseModel):
    level: Literal["fast", "full"] = "fast"
    seed: int = DEFAULT_SEED
    workers: int = Field(default=1, ge=1)


def random_rational_matrix(rng: np.random.Generator, dimension: int) -> np.ndarray:
    """Dense matrix of small Fractions, reproducible from rng."""
    numerators = rng.integers(-4, 5, size=(dimension, dimension))
    denominators = rng.integers(1, 4, size=(dimension, dimension))
    return np.array(
        [[Fraction(int(p), int(q)) for p, q in zip(row_p, row_q)]
         for row_p, row_q in zip(numerators, denominators)],
        dtype=object,
    )


def _result(name: str, passed: bool, expected: Any = None, actual: Any = None,
            tolerance: Optional[float] = None, detail: Optional[str] = None) -> CheckResult:
    if passed:
        return CheckResult(name=name, passed=True, tolerance=tolerance, detail=detail,
                           actual=None if actual is None else str(actual))
    return CheckResult(name=name, passed=False, expected=str(expected), actual=str(actual),
                       tolerance=tolerance, detail=detail)


@dataclass(frozen=True)
class Check:
    name: str
    run: Callable[[VerifyConfig], CheckResult]


CHECKS: List[Check] = []


def check(name: str):
    def register(func: Callable[[VerifyConfig], CheckResult]):
        CHECKS.append(Check(name, func))
        return func
    return register


def _first_mismatch(pairs: Sequence[Tuple[Any, Any, Any]]) -> Optional[Tuple[Any, Any, Any]]:
    for key, expected, actual in pairs:
        if expected != actual:
            return key, expected, actual
    return None


@check("moment-table")
def check_moment_table(config: VerifyConfig) -> CheckResult:
    pairs = [(2 * k, PRINTED_TABLE_NUMERATORS[k - 1], nk_recurrence(k, k + 1)) for k in range(1, 10)]
    mismatch = _first_mismatch(pairs)
    if mismatch:
        order, expected, actual = mismatch
        return _result("moment-table", False, expected, actual, detail=f"order {order}")
    return _result("moment-table", True, detail="orders 2..18 equal the printed numerators")


@check("moment-table-order-20")
def check_order_20(config: VerifyConfig) -> CheckResult:
    computed = nk_recurrence(10, 11)
    printed = PRINTED_TABLE_NUMERATORS[9]
    status = "matches" if computed == printed else "differs from"
    return _result("moment-table-order-20", True, printed, computed,
                   detail=f"recurrence value {computed} {status} printed {printed}")


@check("arcsine-dominance")
def check_arcsine(config: VerifyConfig) -> CheckResult:
    for k in range(1, 11):
        if clt_moment(2 * k) < arcsine_moment(2 * k):
            return _result("arcsine-dominance", False, f">= {arcsine_moment(2 * k)}",
                           clt_moment(2 * k), detail=f"order {2 * k}")
    return _result("arcsine-dominance", True)


@check("ov2-brute-force")
def check_ov2(config: VerifyConfig) -> CheckResult:
    top = 7 if config.level == "full" else 5
    pairs = [(n, nk_recurrence(n, n + 1), count_ov2(2 * n)) for n in range(top + 1)]
    mismatch = _first_mismatch(pairs)
    if mismatch:
        return _result("ov2-brute-force", False, mismatch[1], mismatch[2], detail=f"n={mismatch[0]}")
    return _result("ov2-brute-force", True, detail=f"n <= {top}")


@check("ov2k-brute-force")
def check_ov2k(config: VerifyConfig) -> CheckResult:
    top = 6 if config.level == "full" else 4
    pairs = [((n, k), nk_recurrence(n, k), count_ov2_k(2 * n, k))
             for n in range(top + 1) for k in range(1, n + 2)]
    mismatch = _first_mismatch(pairs)
    if mismatch:
        return _result("ov2k-brute-force", False, mismatch[1], mismatch[2],
                       detail=f"(n, k)={mismatch[0]}")
    return _result("ov2k-brute-force", True, detail=f"n <= {top}")


@check("poly-pipeline")
def check_poly_pipeline(config: VerifyConfig) -> CheckResult:
    top_p, top_q = (10, 15) if config.level == "full" else (6, 8)
    for n in range(top_p + 1):
        actual = evaluate(pn_qn(n)[0], 1)
        if actual != clt_moment(2 * n):
            return _result("poly-pipeline", False, clt_moment(2 * n), actual, detail=f"P_{n}(1)")
    for n in range(top_q + 1):
        expected = rat_poly([arcsine_moment(2 * n)]) * sympy.Poly(1 - X, X, domain=sympy.QQ) ** n
        if pn_qn(n)[1] != expected:
            return _result("poly-pipeline", False, expected.as_expr(), pn_qn(n)[1].as_expr(),
                           detail=f"Q_{n}")
    return _result("poly-pipeline", True, detail=f"P_n for n <= {top_p}, Q_n for n <= {top_q}")


# {12}{36}{45} and {14}{23}{56} share P = (x² + 1)/2, Q = (1 - x)³/2.
PAIR_POLYNOMIALS: Tuple[Tuple[Tuple[Tuple[int, int], ...], Any, Any], ...] = (
    (((1, 2),), 1, 1 - X),
    (((1, 2), (3, 4)), 1, (1 - X) ** 2),
    (((1, 4), (2, 3)), (X**2 + 1) / 2, (1 - X) ** 2 / 2),
    (((1, 2), (3, 4), (5, 6)), 1, (1 - X) ** 3),
    (((1, 2), (3, 6), (4, 5)), (X**2 + 1) / 2, (1 - X) ** 3 / 2),
    (((1, 4), (2, 3), (5, 6)), (X**2 + 1) / 2, (1 - X) ** 3 / 2),
    (((1, 6), (2, 3), (4, 5)), (-X**3 + 3 * X**2 + 1) / 3, (1 - X) ** 3 / 3),
    (((1, 6), (2, 5), (3, 4)), (3 * X**2 + 1) / 6, (1 - X) ** 3 / 6),
)

FOREST_BLOCKS = ((1, 7, 10), (2, 6), (3, 5), (4,), (8, 9))


@check("labeling-fixtures")
def check_labeling_fixtures(config: VerifyConfig) -> CheckResult:
    for blocks, p_expected, q_expected in PAIR_POLYNOMIALS:
        p, q = p_q_of_partition(Partition.from_blocks(blocks))
        if sympy.expand(p.as_expr() - p_expected) != 0 or sympy.expand(q.as_expr() - q_expected) != 0:
            return _result("labeling-fixtures", False, (p_expected, q_expected),
                           (p.as_expr(), q.as_expr()), detail=f"P, Q of {blocks}")
    count = sum(1 for _ in enumerate_adapted_v((2, 7, 5, 7, 5, 2)))
    if count != 5:
        return _result("labeling-fixtures", False, 5, count, detail="|V(2,7,5,7,5,2)|")
    left = LabeledPartition.from_blocks(FOREST_BLOCKS, (3, 2, 3, 4, 5))
    right = LabeledPartition.from_blocks(FOREST_BLOCKS, (1, 3, 2, 4, 9))
    if not is_v_monotone(left) or is_v_monotone(right):
        return _result("labeling-fixtures", False, "(True, False)",
                       (is_v_monotone(left), is_v_monotone(right)), detail="forest labelings")
    missing = sum(1 for _ in enumerate_onc(5)) - count_ov(5)
    if missing != 2:
        return _result("labeling-fixtures", False, 2, missing, detail="|ONC(5) \\ OV(5)|")
    for n in range(5):
        if count_ov(n) != sum(1 for _ in enumerate_onc(n)):
            return _result("labeling-fixtures", False, "OV(n) = ONC(n)", count_ov(n), detail=f"n={n}")
    return _result("labeling-fixtures", True)


def _x(*legs: int) -> sympy.Symbol:
    return moment_symbol(legs)


EXAMPLE_POLYNOMIALS = {
    (1, 2, 1, 2, 1): _x(1, 3, 5) * _x(2) * _x(4) + _x(1) * _x(3) * _x(5) * _x(2, 4)
    - _x(1) * _x(3) * _x(5) * _x(2) * _x(4),
    (2, 1, 2, 1, 2): _x(2, 4) * _x(1, 5) * _x(3) + _x(2) * _x(4) * _x(1, 3, 5)
    - _x(2) * _x(4) * _x(1, 5) * _x(3),
}


def free_excess_term(seq: Sequence[int]) -> Any:
    """Σ κ*_π over labeled partitions the free rule accepts and the V-monotone rule rejects."""
    spec = MomentSpec.symbolic(seq)
    args = spec.formal_arguments(seq)
    total: Any = 0
    for lp in enumerate_adapted(seq, LabelingRule.FREE):
        if not is_v_monotone(lp):
            total += kappa_star_partition(lp, args, spec)
    return sympy.expand(total)


@check("universal-polynomials")
def check_universal_polynomials(config: VerifyConfig) -> CheckResult:
    for seq, expected in EXAMPLE_POLYNOMIALS.items():
        actual = universal_polynomial(seq).to_expression()
        if sympy.expand(actual - expected) != 0:
            return _result("universal-polynomials", False, expected, actual, detail=f"w{seq}")
    return _result("universal-polynomials", True)


@check("free-agreement")
def check_free_agreement(config: VerifyConfig) -> CheckResult:
    """Order <= 5 words over two algebras agree with the free product, except (1,2,1,2,1)."""
    differing = []
    for length in range(1, 6):
        for seq in itertools.product((1, 2), repeat=length):
            if any(a == b for a, b in zip(seq, seq[1:])):
                continue
            spec = MomentSpec.symbolic(seq)
            args = spec.formal_arguments(seq)
            v_value = mixed_moment_combinatorial(seq, args, spec)
            free_value = mixed_moment_combinatorial(seq, args, spec, LabelingRule.FREE)
            difference = sympy.expand(free_value - v_value)
            if difference != 0:
                differing.append(seq)
                if difference != free_excess_term(seq):
                    return _result("free-agreement", False, free_excess_term(seq), difference,
                                   detail=f"free minus V-monotone on {seq}")
    if differing != [(1, 2, 1, 2, 1)]:
        return _result("free-agreement", False, [(1, 2, 1, 2, 1)], differing,
                       detail="words where the free and V-monotone moments differ")
    return _result("free-agreement", True,
                   detail="only (1,2,1,2,1) differs, by φ(a₂)κ*₂(a₁,a₃)κ*₂(b₁,b₂)")


ORACLE_DIMENSIONS = {1: 2, 2: 3, 3: 2}


def oracle_matrices(seed: int, length: int) -> Dict[int, List[np.ndarray]]:
    """Per algebra, one random matrix per possible leg."""
    rng = np.random.default_rng(seed)
    return {
        index: [random_rational_matrix(rng, dimension) for _ in range(length)]
        for index, dimension in ORACLE_DIMENSIONS.items()
    }


def oracle_triangle(seq: Sequence[int], matrices: Dict[int, List[np.ndarray]]) -> Tuple[Any, Any, Any]:
    """(recursive, combinatorial, operator-model) values of one mixed moment."""
    spec = MomentSpec.of_matrices({i: ORACLE_DIMENSIONS[i] for i in set(seq)})
    args = [matrices[index][position] for position, index in enumerate(seq)]
    coerced = [spec.algebra(index).coerce(a) for index, a in zip(seq, args)]  # type: ignore[attr-defined]
    return (
        mixed_moment_recursive(seq, coerced, spec),
        mixed_moment_combinatorial(seq, coerced, spec),
        operator_moment(seq, args),
    )


@check("oracle-triangle")
def check_oracle_triangle(config: VerifyConfig) -> CheckResult:
    top = 6 if config.level == "full" else 4
    matrices = oracle_matrices(config.seed, top)
    words = 0
    for length in range(1, top + 1):
        for seq in itertools.product((1, 2, 3), repeat=length):
            values = oracle_triangle(seq, matrices)
            words += 1
            if not values[0] == values[1] == values[2]:
                return _result("oracle-triangle", False, values[0], values[1:], detail=f"word {seq}")
    return _result("oracle-triangle", True, detail=f"{words} words up to length {top}")


def projected_product(matrices: Sequence[np.ndarray]) -> Any:
    """φ(a_1 P⊥ a_2 P⊥ ... a_n) with P⊥ the projection off the state vector."""
    d = matrices[0].shape[0]
    complement = np.array([[Fraction(int(i == j and i > 0)) for j in range(d)] for i in range(d)],
                          dtype=object)
    product = matrices[0]
    for matrix in matrices[1:]:
        product = product.dot(complement).dot(matrix)
    return product[0, 0]


@check("kappa-star-projection")
def check_kappa_projection(config: VerifyConfig) -> CheckResult:
    rng = np.random.default_rng(config.seed + 1)
    spec = MomentSpec.of_matrices({1: 3})
    for n in range(1, 6):
        matrices = [random_rational_matrix(rng, 3) for _ in range(n)]
        left = kappa_star(matrices, spec)
        right = projected_product(matrices)
        if left != right:
            return _result("kappa-star-projection", False, right, left, detail=f"n={n}")
    return _result("kappa-star-projection", True)


SCAN_NS = (25, 100, 400)


@check("clt-convergence")
def check_clt_convergence(config: VerifyConfig) -> CheckResult:
    for N in (1, 2, 3, 7) + SCAN_NS:
        if omega_N_moment(N, 2) != 1:
            return _result("clt-convergence", False, 1, omega_N_moment(N, 2),
                           detail=f"φ(ω(N)²) at N={N}")
    slopes = {}
    for order in (4, 6):
        errors = [float(abs(Fraction(omega_N_moment(N, order)) - clt_moment(order))) for N in SCAN_NS]
        slope = decay_exponent(SCAN_NS, errors)
        slopes[order] = slope
        if slope is None or slope < 0.45:
            return _result("clt-convergence", False, ">= 0.45", slope, detail=f"order {order}")
    for k in (2, 4, 6, 8):
        for N in (1, 3, 10):
            total = sum(a_pi_moment(pi, N) for pi in enumerate_nc_pair(k))
            if total != omega_N_moment(N, k):
                return _result("clt-convergence", False, omega_N_moment(N, k), total,
                               detail=f"Σ φ(a_π(N)) at N={N}, k={k}")
    return _result("clt-convergence", True,
                   detail=", ".join(f"order {o}: slope {s:.3f}" for o, s in slopes.items()))


ASSOCIATIVITY_WORD = (1, 3, 2, 3, 1)
LEFT_GROUPING = ((1, 2), 3)
RIGHT_GROUPING = (1, (2, 3))


def associativity_values(spec: MomentSpec, args: Sequence[Any]) -> Tuple[Any, Any]:
    return (
        product_state_moment(LEFT_GROUPING, ASSOCIATIVITY_WORD, args, spec),
        product_state_moment(RIGHT_GROUPING, ASSOCIATIVITY_WORD, args, spec),
    )


@check("non-associativity")
def check_non_associativity(config: VerifyConfig) -> CheckResult:
    spec = MomentSpec.symbolic(ASSOCIATIVITY_WORD)
    left, right = associativity_values(spec, spec.formal_arguments(ASSOCIATIVITY_WORD))
    # a_1 c_1 b c_2 a_2 sit at legs 1..5
    expected_left = (_x(1, 5) * _x(3) * _x(2) * _x(4) + _x(1) * _x(5) * _x(3) * _x(2, 4)
                     - _x(1) * _x(5) * _x(3) * _x(2) * _x(4))
    expected_right = _x(1, 5) * _x(3) * _x(2, 4)
    if sympy.expand(left - expected_left) != 0 or sympy.expand(right - expected_right) != 0:
        return _result("non-associativity", False, (expected_left, expected_right),
                       (sympy.expand(left), sympy.expand(right)), detail="symbolic groupings")

    flip = [[0, 1], [1, 0]]
    numeric = MomentSpec.of_matrices({1: 2, 2: 2, 3: 2})
    args = [numeric.algebra(i).coerce(m)  # type: ignore[attr-defined]
            for i, m in zip(ASSOCIATIVITY_WORD, (flip, flip, [[1, 2], [3, 4]], flip, flip))]
    left_value, right_value = associativity_values(numeric, args)
    if (left_value, right_value) != (0, 1):
        return _result("non-associativity", False, (0, 1), (left_value, right_value),
                       detail="numeric groupings")
    return _result("non-associativity", True, detail="(φ₁ ∨ φ₂) ∨ φ₃ = 0, φ₁ ∨ (φ₂ ∨ φ₃) = 1")


@check("mgf-series")
def check_mgf_series(config: VerifyConfig) -> CheckResult:
    series = mgf.mgf_series()
    for order in range(0, 13, 2):
        exact = float(clt_moment(order))
        tolerance = 1e-5 if order <= 8 else 1e-3
        error = mgf.relative_error(series[order], exact)
        if error > tolerance:
            return _result("mgf-series", False, exact, series[order], tolerance,
                           detail=f"order {order}")
    return _result("mgf-series", True, detail="orders 0..12")


@check("mgf-residuals")
def check_mgf_residuals(config: VerifyConfig) -> CheckResult:
    size = 10 if config.level == "full" else 4
    worst = 0.0
    for z in np.linspace(0.02, 0.23, size):
        for x in np.linspace(0.0, 1.0, size):
            worst = max(worst, abs(mgf.integral_equation_residual(float(z), float(x))))
    if worst >= 1e-8:
        return _result("mgf-residuals", False, "< 1e-8", worst, 1e-8, detail="integral equation")
    _, upper = mgf.working_interval()
    for u in np.linspace(0.05, upper, 50):
        error = abs(math.exp(mgf.big_T(max(mgf.big_S(float(u)), 1e-300))) - u)
        if error >= 1e-10:
            return _result("mgf-residuals", False, "< 1e-10", error, 1e-10,
                           detail=f"S round trip at u={u}")
    for t in (0.2, 0.7, 1.0, 2.5, 6.0):
        if abs(mgf.abel_residual(t)) >= 1e-8:
            return _result("mgf-residuals", False, "< 1e-8", mgf.abel_residual(t), 1e-8,
                           detail=f"Abel equation at t={t}")
    return _result("mgf-residuals", True, actual=f"{worst:.2e}", tolerance=1e-8)


def run_check(item: Check, config: VerifyConfig) -> CheckResult:
    start = time()
    try:
        result = item.run(config)
    except Exception as exc:  # a crashing check is a failing check
        result = CheckResult(name=item.name, passed=False, expected="no exception",
                             actual=f"{type(exc).__name__}: {exc}")
    result.seconds = time() - start
    return result


def run_verification(config: VerifyConfig, progress=None, timing_stats=None) -> RunReport:
    """Run every check on a thread pool; the report is sorted by check name.

    The level only changes how far each check searches.
    """
    start = time()
    items = list(CHECKS)
    task = progress.add_task("[yellow]Verifying", total=len(items)) if progress else None
    results: List[CheckResult] = []
    with ThreadPoolExecutor(max_workers=config.workers) as executor:
        futures = {executor.submit(run_check, item, config): item for item in items}
        for future in as_completed(futures):
            result = future.result()
            results.append(result)
            if timing_stats:
                timing_stats.add_timing(result.name, result.seconds)
            if progress:
                colour = "green" if result.passed else "red"
                progress.log(f"[{colour}]{'PASS' if result.passed else 'FAIL'}[/{colour}] {result.name}")
                progress.update(task, advance=1)
    return RunReport(
        command="verify",
        level=config.level,
        seed=config.seed,
        checks=sorted(results, key=lambda r: r.name),
        seconds=time() - start,
    )
