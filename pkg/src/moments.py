"""
V-monotone Moments Engine
Copyright (c) 2024 Carlos Manzanedo Rueda (@cmanaha)

Licensed under the MIT License (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://opensource.org/licenses/MIT
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from labelings import LabelingRule, cutoff, enumerate_adapted
from partitions import LabeledPartition

Scalar = Any  # Fraction, float or a sympy expression
Word = Tuple[Any, ...]
WordCombination = Dict[Word, Scalar]
Grouping = Union[int, Tuple["Grouping", ...]]

# Numerators |OV²(2k)| as printed in the moment table, orders 2..20.
PRINTED_TABLE_NUMERATORS: Tuple[int, ...] = (
    1, 4, 28, 278, 3564, 55928, 1037708, 22217720, 539070560, 1731430024,
)


class AlgebraModel(ABC):
    """One algebra with its state; the moment engines only need these four maps."""

    @abstractmethod
    def product(self, left: Any, right: Any) -> Any:
        pass

    @abstractmethod
    def state(self, element: Any) -> Scalar:
        pass

    @abstractmethod
    def unit(self) -> Any:
        pass

    @abstractmethod
    def centered(self, element: Any) -> Any:
        """Return element - state(element) * unit."""
        pass


class MatrixAlgebra(AlgebraModel):
    """Square matrices with the vector state at basis vector 0.

    In exact mode entries are Fractions held in numpy object arrays.
    """

    def __init__(self, dimension: int, exact: bool = True):
        if dimension < 1:
            raise ValueError(f"Matrix dimension must be >= 1, got {dimension}")
        self.dimension = dimension
        self.exact = exact
        self._unit = self.coerce(np.eye(dimension, dtype=int))

    def coerce(self, matrix: Any) -> np.ndarray:
        array = np.asarray(matrix, dtype=object if self.exact else float)
        if array.shape != (self.dimension, self.dimension):
            raise ValueError(
                f"Expected a {self.dimension}x{self.dimension} matrix, got shape {array.shape}"
            )
        if self.exact:
            return np.array([[Fraction(value) for value in row] for row in array.tolist()],
                            dtype=object)
        return array

    def product(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        return left.dot(right)

    def state(self, element: np.ndarray) -> Scalar:
        return element[0, 0]

    def unit(self) -> np.ndarray:
        return self._unit.copy()

    def centered(self, element: np.ndarray) -> np.ndarray:
        return element - element[0, 0] * self._unit


class WordAlgebra(AlgebraModel):
    """Formal linear combinations of words of generators; the empty word is the unit.

    Subclasses say what the state of a single word is.
    """

    def __init__(self) -> None:
        self._moments: Dict[Word, Scalar] = {}

    @abstractmethod
    def word_moment(self, word: Word) -> Scalar:
        pass

    def generator(self, label: Any) -> WordCombination:
        return {(label,): 1}

    def moment_of(self, word: Word) -> Scalar:
        if not word:
            return 1
        if word not in self._moments:
            self._moments[word] = self.word_moment(word)
        return self._moments[word]

    def product(self, left: WordCombination, right: WordCombination) -> WordCombination:
        result: WordCombination = {}
        for left_word, left_coeff in left.items():
            for right_word, right_coeff in right.items():
                word = left_word + right_word
                result[word] = result.get(word, 0) + left_coeff * right_coeff
        return result

    def state(self, element: WordCombination) -> Scalar:
        total: Scalar = 0
        for word, coeff in element.items():
            total = total + coeff * self.moment_of(word)
        return total

    def unit(self) -> WordCombination:
        return {(): 1}

    def centered(self, element: WordCombination) -> WordCombination:
        result = dict(element)
        result[()] = result.get((), 0) - self.state(element)
        return result


def moment_symbol(word: Iterable[Any]) -> sympy.Symbol:
    """The formal joint moment x_B of the generators listed in word."""
    return sympy.Symbol("x_" + "_".join(str(label) for label in word))


class FormalAlgebra(WordAlgebra):
    """Symbolic algebra: the state of a word of generators is its own moment variable."""

    def word_moment(self, word: Word) -> Scalar:
        return moment_symbol(word)


@dataclass
class MomentSpec:
    """A finite family of algebras keyed by their index."""

    algebras: Dict[int, AlgebraModel] = field(default_factory=dict)

    @classmethod
    def symbolic(cls, indices: Iterable[int]) -> "MomentSpec":
        return cls({index: FormalAlgebra() for index in sorted(set(indices))})

    @classmethod
    def of_matrices(cls, dimensions: Mapping[int, int], exact: bool = True) -> "MomentSpec":
        return cls({index: MatrixAlgebra(dim, exact) for index, dim in dimensions.items()})

    def algebra(self, index: int) -> AlgebraModel:
        if index not in self.algebras:
            raise ValueError(f"No algebra with index {index}; known: {sorted(self.algebras)}")
        return self.algebras[index]

    def formal_arguments(self, seq: Sequence[int]) -> List[WordCombination]:
        """Generators named by their leg position, for symbolic algebras."""
        arguments = []
        for position, index in enumerate(seq, start=1):
            algebra = self.algebra(index)
            if not isinstance(algebra, WordAlgebra):
                raise ValueError(f"Algebra {index} is not symbolic")
            arguments.append(algebra.generator(position))
        return arguments


def _check_arguments(seq: Sequence[int], args: Sequence[Any]) -> None:
    if len(seq) != len(args):
        raise ValueError(f"Got {len(args)} arguments for an index sequence of length {len(seq)}")


def _resolve(state: Union[MomentSpec, AlgebraModel], index: Optional[int]) -> AlgebraModel:
    if isinstance(state, AlgebraModel):
        return state
    if index is None:
        if len(state.algebras) != 1:
            raise ValueError("An algebra index is needed when the spec holds several algebras")
        (index,) = state.algebras
    return state.algebra(index)


def kappa_star(
    args: Sequence[Any], state: Union[MomentSpec, AlgebraModel], index: Optional[int] = None
) -> Scalar:
    """κ*_n of elements of a single algebra.

    κ*_1 = φ and κ*_{n+1}(a_1, ...) = κ*_n(a_1 a_2, ...) - φ(a_1) κ*_n(a_2, ...).
    """
    if not args:
        raise ValueError("κ* needs at least one argument")
    algebra = _resolve(state, index)
    if len(args) == 1:
        return algebra.state(args[0])
    head = algebra.product(args[0], args[1])
    return kappa_star([head, *args[2:]], algebra) - algebra.state(args[0]) * kappa_star(
        args[1:], algebra
    )


def kappa_star_partition(lp: LabeledPartition, args: Sequence[Any], state: MomentSpec) -> Scalar:
    """Product over blocks of κ* evaluated on the block's legs in its labeled algebra."""
    if len(args) != lp.partition.n:
        raise ValueError(f"Got {len(args)} arguments for a partition of [{lp.partition.n}]")
    value: Scalar = 1
    for block, label in zip(lp.partition.blocks, lp.labels):
        value = value * kappa_star([args[leg - 1] for leg in block], state.algebra(label))
    return value


Letter = Tuple[int, Any]


def _merge(letters: Iterable[Letter], spec: MomentSpec) -> List[Letter]:
    merged: List[Letter] = []
    for index, element in letters:
        if merged and merged[-1][0] == index:
            merged[-1] = (index, spec.algebra(index).product(merged[-1][1], element))
        else:
            merged.append((index, element))
    return merged


def _recursive(letters: List[Letter], spec: MomentSpec) -> Scalar:
    if not letters:
        return 1
    if len(letters) == 1:
        index, element = letters[0]
        return spec.algebra(index).state(element)
    r = cutoff([index for index, _ in letters])
    total: Scalar = 0
    for k in range(r):
        index, element = letters[k]
        weight = spec.algebra(index).state(element)
        rest = [(j, spec.algebra(j).centered(a)) for j, a in letters[:k]] + letters[k + 1:]
        total = total + weight * _recursive(_merge(rest, spec), spec)
    return total


def mixed_moment_recursive(seq: Sequence[int], args: Sequence[Any], state: MomentSpec) -> Scalar:
    """φ(a_1 ... a_n) for a_k in algebra seq[k] by the cutoff recursion.

    Neighbours from the same algebra are multiplied together first.
    """
    _check_arguments(seq, args)
    return _recursive(_merge(zip(seq, args), state), state)


def mixed_moment_combinatorial(
    seq: Sequence[int],
    args: Sequence[Any],
    state: MomentSpec,
    rule: LabelingRule = LabelingRule.V_MONOTONE,
) -> Scalar:
    """Sum of κ*_π over the labeled partitions adapted to seq that rule accepts.

    The V-monotone rule gives the V-monotone product, the free rule the free
    product and the monotone rule the monotone product.
    """
    _check_arguments(seq, args)
    total: Scalar = 0
    for lp in enumerate_adapted(seq, rule):
        total = total + kappa_star_partition(lp, args, state)
    return total


@dataclass(frozen=True)
class UniversalPolynomial:
    """Integer polynomial in the subset variables x_B.

    ``terms`` maps a monomial, given as sorted (B, exponent) pairs, to its coefficient.
    """

    terms: Mapping[Tuple[Tuple[Tuple[int, ...], int], ...], int]

    @classmethod
    def from_expression(cls, expression: Any) -> "UniversalPolynomial":
        expression = sympy.expand(expression)
        if expression == 0:
            return cls({})
        symbols = sorted(expression.free_symbols, key=lambda s: _subset_of(s))
        if not symbols:
            return cls({(): int(expression)})
        subsets = [_subset_of(symbol) for symbol in symbols]
        terms = {}
        for exponents, coeff in sympy.Poly(expression, *symbols).terms():
            if not coeff.is_integer:
                raise ValueError(f"Non-integer coefficient {coeff} in universal polynomial")
            monomial = tuple((b, e) for b, e in zip(subsets, exponents) if e)
            terms[monomial] = int(coeff)
        return cls(terms)

    def to_expression(self) -> Any:
        return sum(
            (
                coeff * sympy.Mul(*(moment_symbol(b) ** e for b, e in monomial))
                for monomial, coeff in self.terms.items()
            ),
            sympy.Integer(0),
        )

    def variables(self) -> List[Tuple[int, ...]]:
        return sorted({b for monomial in self.terms for b, _ in monomial}, key=lambda b: (b[0], b))

    def to_json(self) -> List[Dict[str, Any]]:
        rows = []
        for monomial, coeff in self.terms.items():
            legs = sorted((list(b) for b, e in monomial for _ in range(e)), key=lambda b: b[0])
            rows.append({"vars": legs, "coeff": coeff})
        return sorted(rows, key=lambda row: (row["vars"], row["coeff"]))


def _subset_of(symbol: sympy.Symbol) -> Tuple[int, ...]:
    return tuple(int(part) for part in symbol.name.split("_")[1:])


def universal_polynomial(seq: Sequence[int]) -> UniversalPolynomial:
    """The integer polynomial w with φ(a_1 ... a_n) = w({φ(∏_{k∈B} a_k)}_B)."""
    if any(a == b for a, b in zip(seq, seq[1:])):
        raise ValueError(f"Universal polynomials need distinct neighbouring indices, got {seq}")
    spec = MomentSpec.symbolic(seq)
    polynomial = UniversalPolynomial.from_expression(
        mixed_moment_recursive(seq, spec.formal_arguments(seq), spec)
    )
    for subset in polynomial.variables():
        if len({seq[leg - 1] for leg in subset}) != 1:
            raise ValueError(f"Variable x_{subset} is not constant on {tuple(seq)}")
    return polynomial


@lru_cache(maxsize=None)
def _nk(n: int, k: int) -> int:
    if n == 0:
        return 1
    previous = n - 1
    total = 0
    for m in range(previous + 1):
        lower = max(0, m + k - n)
        upper = min(k - 1, m + 1)
        for l in range(lower, upper + 1):
            inner = _nk(m, 1) if l == 0 else sum(_nk(m, r) for r in range(1, l + 1))
            total += (
                comb(k - 1, l) * comb(n + 1 - k, m + 1 - l) * inner * _nk(previous - m, k - l)
            )
    return total


def nk_recurrence(n: int, k: int) -> int:
    """N_{n,k}: ordered V-monotone pair partitions of [2n] compatible with an
    enclosing block labeled k - 1/2."""
    if n < 0 or not 1 <= k <= n + 1:
        raise ValueError(f"N_(n,k) needs n >= 0 and 1 <= k <= n + 1, got n={n}, k={k}")
    return _nk(n, k)


def clt_moment(order: int) -> Fraction:
    """Moment of the standard V-monotone Gaussian law."""
    if order < 0:
        raise ValueError(f"Moment order must be >= 0, got {order}")
    if order % 2:
        return Fraction(0)
    k = order // 2
    return Fraction(nk_recurrence(k, k + 1), factorial(k))


def arcsine_moment(order: int) -> Fraction:
    """Moment of the standard arcsine law, C(2k, k) / 2^k at order 2k."""
    if order < 0:
        raise ValueError(f"Moment order must be >= 0, got {order}")
    if order % 2:
        return Fraction(0)
    k = order // 2
    return Fraction(comb(2 * k, k), 2**k)


@dataclass(frozen=True)
class MomentTableEntry:
    order: int
    numerator: int
    value: Fraction

    def __post_init__(self) -> None:
        if self.value * factorial(self.order // 2) != self.numerator:
            raise ValueError(f"Inconsistent table entry at order {self.order}")

    @property
    def printed_numerator(self) -> Optional[int]:
        index = self.order // 2 - 1
        if 0 <= index < len(PRINTED_TABLE_NUMERATORS):
            return PRINTED_TABLE_NUMERATORS[index]
        return None


def moment_table(order_max: int) -> List[MomentTableEntry]:
    """Even moments of orders 2..order_max from the N_{n,k} recurrence."""
    return [
        MomentTableEntry(2 * k, nk_recurrence(k, k + 1), clt_moment(2 * k))
        for k in range(1, order_max // 2 + 1)
    ]


def _leaves(grouping: Grouping) -> List[int]:
    if isinstance(grouping, int):
        return [grouping]
    return [leaf for child in grouping for leaf in _leaves(child)]


class GroupAlgebra(WordAlgebra):
    """The algebra generated by the legs of a sub-grouping, carrying its product state."""

    def __init__(self, grouping: Grouping, seq: Sequence[int], args: Sequence[Any],
                 spec: MomentSpec):
        super().__init__()
        self.grouping = grouping
        self.seq = seq
        self.args = args
        self.spec = spec

    def word_moment(self, word: Word) -> Scalar:
        return product_state_moment(
            self.grouping,
            [self.seq[p] for p in word],
            [self.args[p] for p in word],
            self.spec,
        )


def product_state_moment(
    grouping: Grouping, seq: Sequence[int], args: Sequence[Any], spec: MomentSpec
) -> Scalar:
    """φ(a_1 ... a_n) under an iterated V-monotone product of states.

    ``grouping`` nests base indices in order, so ((1, 2), 3) is (φ_1 ∨ φ_2) ∨ φ_3 and
    (1, (2, 3)) is φ_1 ∨ (φ_2 ∨ φ_3). Every inner group is evaluated first and then
    treated as one algebra of the enclosing product.
    """
    _check_arguments(seq, args)
    if isinstance(grouping, int):
        if set(seq) - {grouping}:
            raise ValueError(f"Indices {sorted(set(seq))} are not all in group {grouping}")
        return spec.algebra(grouping).state(
            _merge(zip(seq, args), spec)[0][1] if seq else spec.algebra(grouping).unit()
        )
    owner: Dict[int, int] = {}
    for ordinal, child in enumerate(grouping, start=1):
        for leaf in _leaves(child):
            if leaf in owner:
                raise ValueError(f"Index {leaf} appears twice in grouping {grouping}")
            owner[leaf] = ordinal
    missing = set(seq) - set(owner)
    if missing:
        raise ValueError(f"Indices {sorted(missing)} are missing from grouping {grouping}")

    algebras: Dict[int, AlgebraModel] = {}
    outer_seq: List[int] = []
    outer_args: List[Any] = []
    for position, index in enumerate(seq):
        ordinal = owner[index]
        child = grouping[ordinal - 1]
        if isinstance(child, int):
            algebras[ordinal] = spec.algebra(child)
            outer_args.append(args[position])
        else:
            group = algebras.setdefault(ordinal, GroupAlgebra(child, seq, args, spec))
            outer_args.append(group.generator(position))  # type: ignore[attr-defined]
        outer_seq.append(ordinal)
    return mixed_moment_recursive(outer_seq, outer_args, MomentSpec(algebras))
