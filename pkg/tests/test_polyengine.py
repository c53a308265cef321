# © 2024 Carlos Manzanedo Rueda
# MIT License

from fractions import Fraction
from math import comb

import pytest
import sympy

from moments import clt_moment
from partitions import Partition, catalan, enumerate_nc_pair
from polyengine import (
    ONE,
    X,
    add,
    arcsine_coefficient,
    coefficients,
    definite_integral,
    evaluate,
    moment_via_poly,
    multiply,
    p_q_of_partition,
    pn_partition_sum,
    pn_qn,
    q_pi_closed_form,
    qn_sequence,
    rat_poly,
    to_json,
)
from verification import PAIR_POLYNOMIALS


def test_rat_poly_basics():
    p = rat_poly([1, Fraction(1, 2), 3])
    assert coefficients(p) == [Fraction(1), Fraction(1, 2), Fraction(3)]
    assert to_json(p) == [[1, 1], [1, 2], [3, 1]]
    assert evaluate(p, 2) == Fraction(1 + 1 + 12)
    assert coefficients(rat_poly([])) == []
    assert add(p, rat_poly([-1])) == rat_poly([0, Fraction(1, 2), 3])
    assert multiply(rat_poly([1, 1]), rat_poly([1, -1])) == rat_poly([1, 0, -1])


def test_definite_integral_bounds():
    p = rat_poly([0, 1])  # t
    assert definite_integral(p, 0, 1) == rat_poly([Fraction(1, 2)])
    assert definite_integral(p, 0, X) == rat_poly([0, 0, Fraction(1, 2)])
    assert definite_integral(p, X, 1) == rat_poly([Fraction(1, 2), 0, Fraction(-1, 2)])
    with pytest.raises(ValueError):
        definite_integral(p, 0, sympy.Symbol("y"))


def test_empty_partition_polynomials():
    assert p_q_of_partition(Partition.empty()) == (ONE, ONE)


@pytest.mark.parametrize("blocks, p_expected, q_expected", PAIR_POLYNOMIALS)
def test_pair_polynomial_entries(blocks, p_expected, q_expected):
    p, q = p_q_of_partition(Partition.from_blocks(blocks))
    assert sympy.expand(p.as_expr() - p_expected) == 0
    assert sympy.expand(q.as_expr() - q_expected) == 0


def test_p_q_rejects_non_pair():
    with pytest.raises(ValueError):
        p_q_of_partition(Partition.from_blocks([(1, 2, 3)]))
    with pytest.raises(ValueError):
        p_q_of_partition(Partition.from_blocks([(1, 3), (2, 4)]))


@pytest.mark.parametrize("n", range(0, 6))
def test_q_pi_closed_form(n):
    for pi in enumerate_nc_pair(2 * n):
        assert p_q_of_partition(pi)[1] == q_pi_closed_form(pi)


def test_p_pi_degree_and_q_root():
    for n in range(1, 5):
        for pi in enumerate_nc_pair(2 * n):
            p, q = p_q_of_partition(pi)
            assert p.degree() <= n
            assert evaluate(q, 1) == 0


def test_pn_qn_small():
    p1, q1 = pn_qn(1)
    assert p1 == ONE
    assert q1 == rat_poly([1, -1])
    p2, q2 = pn_qn(2)
    assert evaluate(p2, 1) == 2
    assert q2 == rat_poly([Fraction(3, 2), -3, Fraction(3, 2)])
    with pytest.raises(ValueError):
        pn_qn(-1)


@pytest.mark.parametrize("n", range(0, 6))
def test_pn_equals_partition_sum(n):
    assert pn_qn(n)[0] == pn_partition_sum(n)


@pytest.mark.parametrize("n", range(0, 11))
def test_pn_at_one_is_clt_moment(n):
    assert evaluate(pn_qn(n)[0], 1) == clt_moment(2 * n)


@pytest.mark.parametrize("n", range(0, 16))
def test_qn_closed_form(n):
    expected = rat_poly([arcsine_coefficient(n)]) * sympy.Poly(1 - X, X, domain=sympy.QQ) ** n
    assert pn_qn(n)[1] == expected


def test_q3_value():
    assert sympy.expand(pn_qn(3)[1].as_expr() - sympy.Rational(5, 2) * (1 - X) ** 3) == 0


def test_qn_sequence():
    q = qn_sequence(20)
    assert q == [arcsine_coefficient(n) for n in range(21)]
    assert arcsine_coefficient(3) == Fraction(comb(6, 3), 8)


@pytest.mark.parametrize("n", range(0, 13))
def test_pn_bounded_by_catalan(n):
    p = pn_qn(n)[0]
    for t in [Fraction(j, 8) for j in range(9)]:
        assert 0 < evaluate(p, t) <= catalan(n)


def test_pn_degree_bound():
    for n in range(0, 9):
        assert pn_qn(n)[0].degree() <= n


def test_moment_via_poly():
    assert moment_via_poly(0) == 1
    assert moment_via_poly(2) == 1
    assert moment_via_poly(8) == Fraction(278, 24)
    with pytest.raises(ValueError):
        moment_via_poly(3)
