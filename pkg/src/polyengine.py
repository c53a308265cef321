"""
V-monotone Moments Engine
Copyright (c) 2024 Carlos Manzanedo Rueda (@cmanaha)

Licensed under the MIT License (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://opensource.org/licenses/MIT
"""

from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import List, Sequence, Tuple, Union

import sympy
from sympy import QQ, Poly

from partitions import Partition, enumerate_nc_pair, first_leg_split, is_non_crossing

X = sympy.Symbol("x")
RatPoly = Poly
Bound = Union[int, Fraction, sympy.Symbol]


def rat_poly(coefficients: Sequence[Union[int, Fraction]]) -> RatPoly:
    """Build a polynomial in x from ascending coefficients."""
    terms = [sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction)
             else sympy.Rational(c) for c in coefficients]
    return Poly(list(reversed(terms)) or [0], X, domain=QQ)


def coefficients(p: RatPoly) -> List[Fraction]:
    """Ascending exact coefficients with no trailing zeros (zero polynomial -> [])."""
    if p.is_zero:
        return []
    return [Fraction(int(c.p), int(c.q)) for c in reversed(p.all_coeffs())]


def to_json(p: RatPoly) -> List[List[int]]:
    return [[c.numerator, c.denominator] for c in coefficients(p)]


def evaluate(p: RatPoly, x: Union[int, Fraction]) -> Fraction:
    value = sympy.Rational(p.eval(sympy.Rational(Fraction(x).numerator, Fraction(x).denominator)))
    return Fraction(int(value.p), int(value.q))


def add(p: RatPoly, q: RatPoly) -> RatPoly:
    return p + q


def multiply(p: RatPoly, q: RatPoly) -> RatPoly:
    return p * q


def _at(antiderivative: RatPoly, bound: Bound) -> RatPoly:
    if isinstance(bound, sympy.Symbol):
        if bound != X:
            raise ValueError(f"Integration bounds must be rationals or {X}, got {bound}")
        return antiderivative
    point = Fraction(bound)
    return Poly(antiderivative.eval(sympy.Rational(point.numerator, point.denominator)), X,
                domain=QQ)


def definite_integral(p: RatPoly, lower: Bound, upper: Bound) -> RatPoly:
    """∫_lower^upper p(t) dt where each bound is a rational or the variable x."""
    antiderivative = p.integrate()
    return _at(antiderivative, upper) - _at(antiderivative, lower)


ONE = rat_poly([1])


def _require_pair(pi: Partition) -> None:
    if not pi.is_pair or not is_non_crossing(pi):
        raise ValueError(f"Expected a non-crossing pair partition, got {pi.to_json()}")


@lru_cache(maxsize=None)
def _p_q(pi: Partition) -> Tuple[RatPoly, RatPoly]:
    if pi.n == 0:
        return ONE, ONE
    inner, right = first_leg_split(pi)
    p_inner, q_inner = _p_q(inner)
    p_right, q_right = _p_q(right)
    upper_tail = definite_integral(q_inner, X, 1)
    p = (definite_integral(p_inner, 0, X) + upper_tail) * p_right
    return p, upper_tail * q_right


def p_q_of_partition(pi: Partition) -> Tuple[RatPoly, RatPoly]:
    """P_π and Q_π from the first-leg recursion, with 1 for the empty partition."""
    _require_pair(pi)
    return _p_q(pi)


@lru_cache(maxsize=None)
def _q_coefficient(pi: Partition) -> Fraction:
    if pi.n == 0:
        return Fraction(1)
    inner, right = first_leg_split(pi)
    return _q_coefficient(inner) * _q_coefficient(right) / (len(inner) + 1)


def q_pi_closed_form(pi: Partition) -> RatPoly:
    """q_π (1 - x)^{|π|}."""
    _require_pair(pi)
    return rat_poly([_q_coefficient(pi)]) * Poly(1 - X, X, domain=QQ) ** len(pi)


@lru_cache(maxsize=None)
def _pn_qn(n: int) -> Tuple[RatPoly, RatPoly]:
    if n == 0:
        return ONE, ONE
    p_total = Poly(0, X, domain=QQ)
    q_total = Poly(0, X, domain=QQ)
    for m in range(n):
        p_m, q_m = _pn_qn(m)
        p_rest, q_rest = _pn_qn(n - 1 - m)
        upper_tail = definite_integral(q_m, X, 1)
        p_total += (definite_integral(p_m, 0, X) + upper_tail) * p_rest
        q_total += upper_tail * q_rest
    return p_total, q_total


def pn_qn(n: int) -> Tuple[RatPoly, RatPoly]:
    """P_n and Q_n from their convolution recursions."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    for m in range(n):
        _pn_qn(m)  # fill the cache bottom-up to keep recursion shallow
    return _pn_qn(n)


def pn_partition_sum(n: int) -> RatPoly:
    """Σ_{π ∈ NC²(2n)} P_π; only a cross-check for pn_qn."""
    total = Poly(0, X, domain=QQ)
    for pi in enumerate_nc_pair(2 * n):
        total += p_q_of_partition(pi)[0]
    return total


def qn_sequence(n: int) -> List[Fraction]:
    """q_0..q_n from q_{m+1} = Σ_j q_j q_{m-j} / (j + 1)."""
    q = [Fraction(1)]
    for m in range(n):
        q.append(sum((q[j] * q[m - j] / (j + 1) for j in range(m + 1)), Fraction(0)))
    return q


def arcsine_coefficient(n: int) -> Fraction:
    """2^{-n} C(2n, n)."""
    return Fraction(comb(2 * n, n), 2**n)


def moment_via_poly(order: int) -> Fraction:
    """Even moment of the V-monotone Gaussian law as P_{order/2}(1)."""
    if order < 0 or order % 2:
        raise ValueError(
            f"moment_via_poly needs an even order >= 0 (odd moments vanish), got {order}"
        )
    return evaluate(pn_qn(order // 2)[0], 1)
