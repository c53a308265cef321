"""
V-monotone Moments Engine
Copyright (c) 2024 Carlos Manzanedo Rueda (@cmanaha)

Licensed under the MIT License (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://opensource.org/licenses/MIT
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, Iterator, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from labelings import count_v_labelings, is_valley
from moments import MatrixAlgebra, clt_moment
from partitions import Partition, enumerate_nc_pair, first_leg_split, is_non_crossing

Scalar = Any
Letter = Tuple[int, int]  # (algebra index, local basis index >= 1)
FockWord = Tuple[Letter, ...]
VACUUM: FockWord = ()


class FockConfig(BaseModel):
    """How operator-model moments are evaluated."""

    exact: bool = Field(default=True)
    method: Literal["reduced", "sparse"] = Field(default="reduced")
    truncation_depth: Optional[int] = Field(default=None, ge=0)


def is_fock_word(word: FockWord) -> bool:
    return is_valley([index for index, _ in word])


class FockVector:
    """Finitely supported vector over the valley-word basis."""

    def __init__(self, coefficients: Optional[Mapping[FockWord, Scalar]] = None):
        self._coefficients: Dict[FockWord, Scalar] = {}
        for word, coeff in (coefficients or {}).items():
            word = tuple(word)
            if not is_fock_word(word):
                raise ValueError(f"{word} is not a valley word")
            if coeff != 0:
                self._coefficients[word] = coeff

    @classmethod
    def vacuum(cls) -> "FockVector":
        return cls({VACUUM: Fraction(1)})

    @classmethod
    def basis(cls, *indices: int) -> "FockVector":
        """e_{i_1} ⊗ ... ⊗ e_{i_n} of the discrete model."""
        return cls({tuple((i, 1) for i in indices): Fraction(1)})

    @classmethod
    def _trusted(cls, coefficients: Dict[FockWord, Scalar]) -> "FockVector":
        vector = cls()
        vector._coefficients = {w: c for w, c in coefficients.items() if c != 0}
        return vector

    def items(self) -> Iterator[Tuple[FockWord, Scalar]]:
        return iter(self._coefficients.items())

    def coefficient(self, word: FockWord) -> Scalar:
        return self._coefficients.get(tuple(word), 0)

    @property
    def support(self) -> List[FockWord]:
        return sorted(self._coefficients)

    def __len__(self) -> int:
        return len(self._coefficients)

    def __add__(self, other: "FockVector") -> "FockVector":
        result = dict(self._coefficients)
        for word, coeff in other.items():
            result[word] = result.get(word, 0) + coeff
        return FockVector._trusted(result)

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + other * -1

    def __mul__(self, scalar: Scalar) -> "FockVector":
        return FockVector._trusted({w: c * scalar for w, c in self._coefficients.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FockVector) and self._coefficients == other._coefficients

    def __repr__(self) -> str:
        return f"FockVector({self._coefficients!r})"

    def inner(self, other: "FockVector") -> Scalar:
        """Real inner product <self, other>."""
        smaller, larger = (self, other) if len(self) <= len(other) else (other, self)
        total: Scalar = 0
        for word, coeff in smaller.items():
            total = total + coeff * larger.coefficient(word)
        return total

    def norm_squared(self) -> Scalar:
        return self.inner(self)

    def truncated(self, depth: int) -> "FockVector":
        return FockVector._trusted({w: c for w, c in self.items() if len(w) <= depth})


@dataclass(frozen=True)
class FockOperator:
    """A linear map given by its action on basis words.

    ``depth_shift`` bounds how much the operator changes word length.
    """

    rule: Callable[[FockWord], FockVector]
    depth_shift: int = 1

    def __call__(self, vector: FockVector) -> FockVector:
        result: Dict[FockWord, Scalar] = {}
        for word, coeff in vector.items():
            for image_word, image_coeff in self.rule(word).items():
                result[image_word] = result.get(image_word, 0) + coeff * image_coeff
        return FockVector._trusted(result)

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(lambda word: self(other.rule(word)),
                            self.depth_shift + other.depth_shift)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(lambda word: self.rule(word) + other.rule(word),
                            max(self.depth_shift, other.depth_shift))

    def scaled(self, scalar: Scalar) -> "FockOperator":
        return FockOperator(lambda word: self.rule(word) * scalar, self.depth_shift)


IDENTITY = FockOperator(lambda word: FockVector._trusted({word: Fraction(1)}), 0)


def _indices(word: FockWord) -> List[int]:
    return [index for index, _ in word]


def _accepts(i: int, word: FockWord) -> bool:
    """True iff (i, i_1, ..., i_n) is still a valley."""
    return is_valley([i] + _indices(word))


def create(i: int) -> FockOperator:
    """a_i: prepend e_i when the longer word is still a valley."""

    def rule(word: FockWord) -> FockVector:
        if _accepts(i, word):
            return FockVector._trusted({((i, 1),) + word: Fraction(1)})
        return FockVector()

    return FockOperator(rule)


def annihilate(i: int) -> FockOperator:
    """a_i*: remove a head letter e_i."""

    def rule(word: FockWord) -> FockVector:
        if word and word[0] == (i, 1):
            return FockVector._trusted({word[1:]: Fraction(1)})
        return FockVector()

    return FockOperator(rule)


def lambda_tilde(i: int, T: Any, exact: bool = True) -> FockOperator:
    """V-monotone left action of a d x d matrix T of algebra i.

    Local basis 0 is the state vector ξ_i; local basis b >= 1 is the letter (i, b).
    A word headed by (i, b) is e_b ⊗ rest; a word w with (i, w) a valley is ξ_i ⊗ w;
    every other word lies outside the range of U_i and is killed.
    """
    if i < 1:
        raise ValueError(f"Algebra index must be >= 1, got {i}")
    matrix = np.asarray(T)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"lambda_tilde needs a square matrix, got shape {matrix.shape}")
    matrix = MatrixAlgebra(matrix.shape[0], exact).coerce(matrix)
    d = matrix.shape[0]

    def column(local: int, tail: FockWord) -> FockVector:
        images: Dict[FockWord, Scalar] = {tail: matrix[0, local]}
        for b in range(1, d):
            images[((i, b),) + tail] = matrix[b, local]
        return FockVector._trusted(images)

    def rule(word: FockWord) -> FockVector:
        if word and word[0][0] == i:
            local = word[0][1]
            if local >= d:
                raise ValueError(f"Letter {word[0]} is outside a {d}-dimensional algebra")
            return column(local, word[1:])
        if _accepts(i, word):
            return column(0, word)
        return FockVector()

    return FockOperator(rule)


def projection(i: int) -> FockOperator:
    """U_i, the projection onto words headed by i or accepting i."""

    def rule(word: FockWord) -> FockVector:
        if (word and word[0][0] == i) or _accepts(i, word):
            return FockVector._trusted({word: Fraction(1)})
        return FockVector()

    return FockOperator(rule, 0)


def omega(i: int) -> FockOperator:
    return create(i) + annihilate(i)


def _apply_pruned(operators: Sequence[FockOperator], vector: FockVector,
                  depth: Optional[int]) -> FockVector:
    """Apply operators right to left, dropping words that can no longer reach the vacuum."""
    remaining = len(operators)
    for operator in reversed(operators):
        vector = operator(vector)
        remaining -= 1
        vector = vector.truncated(remaining if depth is None else min(depth, remaining))
    return vector


def operator_moment(seq: Sequence[int], matrices: Sequence[Any],
                    config: Optional[FockConfig] = None) -> Scalar:
    """<λ̃_{i_1}(T_1) ... λ̃_{i_n}(T_n) Ω, Ω>."""
    config = config or FockConfig()
    if len(seq) != len(matrices):
        raise ValueError(f"Got {len(matrices)} matrices for {len(seq)} indices")
    if config.truncation_depth is not None and config.truncation_depth < len(seq):
        raise ValueError(
            f"Truncation depth {config.truncation_depth} is below the word length {len(seq)}"
        )
    operators = [lambda_tilde(i, T, config.exact) for i, T in zip(seq, matrices)]
    vacuum = FockVector.vacuum() if config.exact else FockVector({VACUUM: 1.0})
    return _apply_pruned(operators, vacuum, config.truncation_depth).coefficient(VACUUM)


def creation_sum(N: int) -> FockOperator:
    """Σ_i a_i = √N a(N)."""
    _check_range(N)

    def rule(word: FockWord) -> FockVector:
        return FockVector._trusted(
            {((i, 1),) + word: Fraction(1) for i in range(1, N + 1) if _accepts(i, word)}
        )

    return FockOperator(rule)


def annihilation_sum(N: int) -> FockOperator:
    """Σ_i a_i* = √N a*(N)."""
    _check_range(N)

    def rule(word: FockWord) -> FockVector:
        if word and word[0][0] <= N and word[0][1] == 1:
            return FockVector._trusted({word[1:]: Fraction(1)})
        return FockVector()

    return FockOperator(rule)


def _check_range(N: int) -> None:
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")


def _normalise(count: int, N: int, k: int, exact: bool) -> Scalar:
    value = Fraction(count, N ** (k // 2))
    return value if exact else float(value)


# Head states: per top letter l, "free" words (length 1 or head below its neighbour)
# accept any new letter, "descending" words (head above its neighbour) only larger ones.

def _allowed_sums(free: List[int], descending: List[int], N: int) -> Tuple[int, List[int], List[int]]:
    """Σ over admissible pushes from the vacuum, a free and a descending state."""
    below = [0] * (N + 1)
    for c in range(1, N + 1):
        below[c] = below[c - 1] + free[c - 1]
    above = [0] * (N + 2)
    for c in range(N, 0, -1):
        above[c] = above[c + 1] + descending[c - 1]
    from_free = [below[l - 1] + above[l + 1] for l in range(1, N + 1)]
    from_descending = [above[l + 1] for l in range(1, N + 1)]
    return below[N], from_free, from_descending


def _excursion_counts(N: int, n: int) -> int:
    free = [[1] * N]
    descending = [[1] * N]
    vacuum = [1]
    pushes: List[Tuple[int, List[int], List[int]]] = []
    for m in range(1, n + 1):
        pushes.append(_allowed_sums(free[m - 1], descending[m - 1], N))
        vacuum.append(sum(pushes[j][0] * vacuum[m - 1 - j] for j in range(m)))
        free.append([
            sum(pushes[j][1][l] * free[m - 1 - j][l] for j in range(m)) for l in range(N)
        ])
        descending.append([
            sum(pushes[j][2][l] * descending[m - 1 - j][l] for j in range(m)) for l in range(N)
        ])
    return vacuum[n]


def omega_N_moment(N: int, k: int, config: Optional[FockConfig] = None) -> Scalar:
    """φ(ω(N)^k) with ω(N) = N^{-1/2} Σ_i (a_i + a_i*).

    The reduced method counts vacuum excursions by head state; the sparse method
    applies the operators word by word.
    """
    config = config or FockConfig()
    _check_range(N)
    if k < 0:
        raise ValueError(f"Power must be >= 0, got {k}")
    if k % 2:
        return Fraction(0) if config.exact else 0.0
    if config.method == "sparse":
        step = creation_sum(N) + annihilation_sum(N)
        count = _apply_pruned([step] * k, FockVector.vacuum(), config.truncation_depth)
        return _normalise(count.coefficient(VACUUM), N, k, config.exact)
    return _normalise(_excursion_counts(N, k // 2), N, k, config.exact)


def omega_N_moment_labelings(N: int, k: int) -> Fraction:
    """φ(ω(N)^k) as a count of V-monotone [N]-labelings of NC pair partitions."""
    _check_range(N)
    if k % 2:
        return Fraction(0)
    total = sum(count_v_labelings(pi, N) for pi in enumerate_nc_pair(k))
    return Fraction(total, N ** (k // 2))


def _require_pair(pi: Partition) -> None:
    if not pi.is_pair or not is_non_crossing(pi):
        raise ValueError(f"Expected a non-crossing pair partition, got {pi.to_json()}")


def a_pi_operator(pi: Partition, N: int) -> FockOperator:
    """√N^{|π|·2} a_π(N), built as a* a_{π'} a a_{π''}."""
    _require_pair(pi)
    if pi.n == 0:
        return IDENTITY
    inner, right = first_leg_split(pi)
    return annihilation_sum(N) @ a_pi_operator(inner, N) @ creation_sum(N) @ a_pi_operator(
        right, N
    )


@lru_cache(maxsize=None)
def _pi_counts(pi: Partition, N: int) -> Tuple[int, Tuple[int, ...], Tuple[int, ...]]:
    """Realisations of a_π from the vacuum, each free state and each descending state."""
    if pi.n == 0:
        return 1, (1,) * N, (1,) * N
    inner, right = first_leg_split(pi)
    inner_vacuum, inner_free, inner_descending = _pi_counts(inner, N)
    right_vacuum, right_free, right_descending = _pi_counts(right, N)
    from_vacuum, from_free, from_descending = _allowed_sums(
        list(inner_free), list(inner_descending), N
    )
    return (
        from_vacuum * right_vacuum,
        tuple(a * b for a, b in zip(from_free, right_free)),
        tuple(a * b for a, b in zip(from_descending, right_descending)),
    )


def a_pi_moment(pi: Partition, N: int, config: Optional[FockConfig] = None) -> Scalar:
    """φ(a_π(N)) for a non-crossing pair partition π."""
    config = config or FockConfig()
    _require_pair(pi)
    _check_range(N)
    if config.method == "sparse":
        count = a_pi_operator(pi, N)(FockVector.vacuum()).coefficient(VACUUM)
    else:
        count = _pi_counts(pi, N)[0]
    return _normalise(count, N, pi.n, config.exact)


def epsilon_word(pi: Partition) -> Tuple[str, ...]:
    """Annihilation ('*') on the left leg of every pair, creation ('1') on the right."""
    _require_pair(pi)
    left_legs = {block[0] for block in pi.blocks}
    return tuple("*" if leg in left_legs else "1" for leg in range(1, pi.n + 1))


def is_dyck_epsilon_word(word: Sequence[str]) -> bool:
    """Read right to left, creations never fall behind annihilations and balance at the end."""
    height = 0
    for letter in reversed(word):
        if letter not in ("*", "1"):
            return False
        height += 1 if letter == "1" else -1
        if height < 0:
            return False
    return height == 0


def partition_from_epsilon_word(word: Sequence[str]) -> Partition:
    if not is_dyck_epsilon_word(word):
        raise ValueError(f"{tuple(word)} is not a balanced ε-word")
    open_legs: List[int] = []
    blocks = []
    for leg in range(len(word), 0, -1):
        if word[leg - 1] == "1":
            open_legs.append(leg)
        else:
            blocks.append((leg, open_legs.pop()))
    return Partition(len(word), tuple(blocks))


class ScanRow(BaseModel):
    N: int
    order: int
    value: float
    error: float
    slope: Optional[float] = None


def convergence_scan(Ns: Sequence[int], orders: Sequence[int],
                     config: Optional[FockConfig] = None) -> List[ScanRow]:
    """φ(ω(N)^order) against the limit moment, with the fitted decay exponent per order."""
    config = config or FockConfig()
    rows: List[ScanRow] = []
    for order in orders:
        limit = clt_moment(order)
        errors = []
        block: List[ScanRow] = []
        for N in Ns:
            value = Fraction(omega_N_moment(N, order, config))
            error = abs(value - limit)
            errors.append(float(error))
            block.append(ScanRow(N=N, order=order, value=float(value), error=float(error)))
        slope = decay_exponent(Ns, errors)
        for row in block:
            row.slope = slope
        rows.extend(block)
    return rows


def decay_exponent(Ns: Sequence[int], errors: Sequence[float]) -> Optional[float]:
    """Least-squares p in error ≈ C N^{-p}; None when the errors vanish."""
    if len(Ns) < 2 or any(e <= 0 for e in errors):
        return None
    slope, _ = np.polyfit(np.log(np.asarray(Ns, dtype=float)), np.log(errors), 1)
    return float(-slope)


def richardson_limit(N: int, k: int) -> float:
    """Extrapolate φ(ω(N)^k) to N = ∞ from N and 2N assuming a 1/N leading error."""
    low = Fraction(omega_N_moment(N, k))
    high = Fraction(omega_N_moment(2 * N, k))
    return float(2 * high - low)
