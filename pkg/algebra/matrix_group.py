"""
Integer matrices, matrices over Z/lZ, the generator sets used for the level-2
statements, the constructive reduction inside S(v), closure enumeration and
exhaustive enumeration of GL_r(Z/lZ).

IntMatrix is an exact sympy ImmutableMatrix. ModMatrix is a hashable value
with entries reduced to 0..l-1; closure and brute force run on numpy int64
arrays and only convert to ModMatrix at the end.
"""

import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, prod
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sympy import ImmutableMatrix, Matrix, eye

from algebra.errors import (
    ClosureCapExceeded,
    NotUnimodularError,
    PreconditionError,
    SingularMatrixError,
)
from config import BRUTE_FORCE_MAX_ENTRIES, CLOSURE_CAP

logger = logging.getLogger(__name__)

IntMatrix = ImmutableMatrix
ParityVector = Tuple[int, ...]

_TAG = re.compile(r"([XT])\[(\d+)(?:,(\d+))?\]")


# ---------------------------------------------------------------------------
# Integer matrices

def identity(r: int) -> IntMatrix:
    return ImmutableMatrix(eye(r))


def elementary(i: int, j: int, r: int) -> IntMatrix:
    """X_ij: identity plus a one at row i, column j"""
    if i == j:
        raise PreconditionError(f"elementary matrix needs i != j, got i = j = {i}")
    if not (1 <= i <= r and 1 <= j <= r):
        raise PreconditionError(f"indices ({i},{j}) outside 1..{r}")
    return ImmutableMatrix(r, r, lambda a, b: 1 if a == b or (a, b) == (i - 1, j - 1) else 0)


def diag_t(i: int, r: int) -> IntMatrix:
    """T_i: identity with -1 at (i, i)"""
    if not 1 <= i <= r:
        raise PreconditionError(f"index {i} outside 1..{r}")
    return ImmutableMatrix(r, r, lambda a, b: (-1 if a == i - 1 else 1) if a == b else 0)


def multiply(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    return ImmutableMatrix(a * b)


def determinant(m: IntMatrix) -> int:
    return int(m.det())


def invert(m: IntMatrix) -> IntMatrix:
    """Exact inverse of a unimodular matrix: adjugate divided by det"""
    det = determinant(m)
    if det not in (1, -1):
        raise NotUnimodularError(f"determinant {det} is not ±1")
    return ImmutableMatrix(m.adjugate() * det)


def commutator(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """[a, b] = a b a^-1 b^-1"""
    return ImmutableMatrix(a * b * invert(a) * invert(b))


def in_principal_congruence(m: IntMatrix, modulus: int) -> bool:
    """M ≡ I entrywise mod l and det M = ±1"""
    if modulus < 2:
        raise PreconditionError(f"modulus must be >= 2, got {modulus}")
    if determinant(m) not in (1, -1):
        return False
    r = m.rows
    return all((int(m[a, b]) - (1 if a == b else 0)) % modulus == 0 for a in range(r) for b in range(r))


def matrix_rows(m) -> List[List[int]]:
    """Row-major integer lists for reports"""
    if isinstance(m, ModMatrix):
        return [list(row) for row in m.entries]
    return [[int(x) for x in row] for row in m.tolist()]


# ---------------------------------------------------------------------------
# Matrices over Z/lZ

@dataclass(frozen=True, order=True)
class ModMatrix:
    entries: Tuple[Tuple[int, ...], ...]
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise PreconditionError(f"modulus must be >= 2, got {self.modulus}")
        r = len(self.entries)
        if r == 0 or any(len(row) != r for row in self.entries):
            raise PreconditionError("ModMatrix entries must form a non-empty square")
        if any(not 0 <= x < self.modulus for row in self.entries for x in row):
            raise PreconditionError(f"entries must be reduced to 0..{self.modulus - 1}")

    @property
    def r(self) -> int:
        return len(self.entries)

    @classmethod
    def identity(cls, r: int, modulus: int) -> "ModMatrix":
        return cls(tuple(tuple(1 if a == b else 0 for b in range(r)) for a in range(r)), modulus)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], modulus: int) -> "ModMatrix":
        return cls(tuple(tuple(int(x) % modulus for x in row) for row in rows), modulus)

    @classmethod
    def from_array(cls, array: np.ndarray, modulus: int) -> "ModMatrix":
        return cls.from_rows(np.mod(array, modulus).tolist(), modulus)

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def to_sympy(self) -> Matrix:
        return Matrix(self.entries)

    def _check_compatible(self, other: "ModMatrix"):
        if self.modulus != other.modulus:
            raise PreconditionError(f"mixed moduli {self.modulus} and {other.modulus}")
        if self.r != other.r:
            raise PreconditionError(f"mixed sizes {self.r} and {other.r}")

    def __matmul__(self, other: "ModMatrix") -> "ModMatrix":
        self._check_compatible(other)
        return ModMatrix.from_array(self.to_array() @ other.to_array(), self.modulus)

    __mul__ = __matmul__

    def __pow__(self, exponent: int) -> "ModMatrix":
        base = self if exponent >= 0 else self.inverse()
        result = ModMatrix.identity(self.r, self.modulus)
        for _ in range(abs(exponent)):
            result = result @ base
        return result

    def det(self) -> int:
        return int(self.to_sympy().det()) % self.modulus

    def is_invertible(self) -> bool:
        return gcd(self.det(), self.modulus) == 1

    def is_identity(self) -> bool:
        return self == ModMatrix.identity(self.r, self.modulus)

    def inverse(self) -> "ModMatrix":
        if not self.is_invertible():
            raise SingularMatrixError(f"matrix with det {self.det()} is singular mod {self.modulus}")
        return ModMatrix.from_rows(self.to_sympy().inv_mod(self.modulus).tolist(), self.modulus)

    def __str__(self) -> str:
        return "[" + "; ".join(" ".join(str(x) for x in row) for row in self.entries) + f"] mod {self.modulus}"


def reduce_mod(m: IntMatrix, modulus: int) -> ModMatrix:
    if modulus < 2:
        raise PreconditionError(f"modulus must be >= 2, got {modulus}")
    return ModMatrix.from_rows(m.tolist(), modulus)


# ---------------------------------------------------------------------------
# Generator words

@lru_cache(maxsize=None)
def resolve_tag(tag: str, r: int) -> IntMatrix:
    """'X[1,3]', 'T[1]' or a product such as 'X[1,3]X[2,3]'"""
    result = identity(r)
    for kind, a, b in tag_factors(tag):
        if kind == "X":
            if b is None:
                raise PreconditionError(f"elementary tag needs two indices: {tag!r}")
            result = result * elementary(a, b, r)
        else:
            result = result * diag_t(a, r)
    return ImmutableMatrix(result)


def tag_factors(tag: str) -> List[Tuple[str, int, Optional[int]]]:
    """Split a tag into (kind, first index, second index or None) factors"""
    factors = list(_TAG.finditer(tag))
    if not factors or "".join(match.group(0) for match in factors) != tag:
        raise PreconditionError(f"unknown generator tag {tag!r}")
    return [
        (match.group(1), int(match.group(2)), None if match.group(3) is None else int(match.group(3)))
        for match in factors
    ]


def elementary_tag(i: int, j: int) -> str:
    return f"X[{i},{j}]"


def double_tag(i: int, j: int, k: int) -> str:
    """Tag of X_ik X_jk, lower row index first"""
    i, j = sorted((i, j))
    return f"X[{i},{k}]X[{j},{k}]"


@dataclass(frozen=True)
class GenWord:
    """Word over named matrix generators; the product reads left to right"""

    letters: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        if any(exponent == 0 for _, exponent in self.letters):
            raise PreconditionError("generator word exponents must be nonzero")

    def __len__(self) -> int:
        return len(self.letters)

    def __add__(self, other: "GenWord") -> "GenWord":
        return GenWord(self.letters + other.letters)

    def inverse(self) -> "GenWord":
        return GenWord(tuple((tag, -exponent) for tag, exponent in reversed(self.letters)))

    def tags(self) -> List[str]:
        return [tag for tag, _ in self.letters]

    def evaluate_with(self, table: Mapping[str, object], unit):
        result = unit
        for tag, exponent in self.letters:
            result = result * table[tag] ** exponent
        return result

    def evaluate(self, r: int, modulus: Optional[int] = None):
        """Product over Z, or over Z/lZ when a modulus is given"""
        tags = set(self.tags())
        if modulus is None:
            table = {tag: resolve_tag(tag, r) for tag in tags}
            return ImmutableMatrix(self.evaluate_with(table, identity(r)))
        table = {tag: reduce_mod(resolve_tag(tag, r), modulus) for tag in tags}
        return self.evaluate_with(table, ModMatrix.identity(r, modulus))

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(tag if exponent == 1 else f"{tag}^{exponent}" for tag, exponent in self.letters)


def glz_generators(r: int) -> Dict[str, IntMatrix]:
    """The elementary matrices together with T_1"""
    table = {elementary_tag(i, j): elementary(i, j, r) for i in range(1, r + 1) for j in range(1, r + 1) if i != j}
    table["T[1]"] = diag_t(1, r)
    return table


def swap_matrix_word(i: int, j: int, k: int) -> GenWord:
    """(X_ik X_jk · X_ki · X_kj)^2, the row swap of i and j modulo 2"""
    if len({i, j, k}) != 3:
        raise PreconditionError(f"swap word needs distinct indices, got ({i},{j},{k})")
    half = ((double_tag(i, j, k), 1), (elementary_tag(k, i), 1), (elementary_tag(k, j), 1))
    return GenWord(half + half)


# ---------------------------------------------------------------------------
# Level-2 generator sets

def _check_rank(r: int):
    if r < 2:
        raise PreconditionError(f"rank must be >= 2, got {r}")


def gamma2_generator_names(r: int) -> List[str]:
    _check_rank(r)
    squares = [elementary_tag(i, j) + elementary_tag(i, j) for i in range(1, r + 1) for j in range(1, r + 1) if i != j]
    return squares + [f"T[{i}]" for i in range(1, r + 1)]


def gamma2_generators(r: int) -> List[IntMatrix]:
    """X_ij^2 for i != j in lexicographic order, then T_1..T_r"""
    return [resolve_tag(tag, r) for tag in gamma2_generator_names(r)]


def gamma2_alt_generator_names(i: int, r: int) -> List[str]:
    _check_rank(r)
    if not 1 <= i <= r:
        raise PreconditionError(f"index {i} outside 1..{r}")
    others = [k for k in range(1, r + 1) if k != i]
    row = [elementary_tag(i, k) for k in others]
    squares = [elementary_tag(j, i) + elementary_tag(j, i) for j in others]
    return row + squares + [f"T[{j}]" for j in range(1, r + 1)]


def gamma2_alt_generators(i: int, r: int) -> List[IntMatrix]:
    """X_ik (k != i), X_ji^2 (j != i), T_1..T_r"""
    return [resolve_tag(tag, r) for tag in gamma2_alt_generator_names(i, r)]


def sv_generator_names(v: ParityVector) -> List[str]:
    """X_ij with v_i = 0, then X_ik X_jk with v_i = v_j = 1, i < j, k outside {i, j}"""
    r = len(v)
    _check_rank(r)
    names = [elementary_tag(i, j) for i in range(1, r + 1) for j in range(1, r + 1) if i != j and v[i - 1] == 0]
    for i in range(1, r + 1):
        for j in range(i + 1, r + 1):
            if v[i - 1] == 1 and v[j - 1] == 1:
                names.extend(double_tag(i, j, k) for k in range(1, r + 1) if k not in (i, j))
    return names


def sv_generators(v: ParityVector) -> List[ModMatrix]:
    return [reduce_mod(resolve_tag(tag, len(v)), 2) for tag in sv_generator_names(v)]


def in_sv(m: ModMatrix, v: ParityVector) -> bool:
    """v · M = v over Z/2Z"""
    if m.modulus != 2:
        raise PreconditionError(f"S(v) lives mod 2, got modulus {m.modulus}")
    if len(v) != m.r:
        raise PreconditionError(f"parity vector of length {len(v)} for a {m.r}x{m.r} matrix")
    if not m.is_invertible():
        raise SingularMatrixError("matrix is singular mod 2")
    product = (np.array(v, dtype=np.int64) @ m.to_array()) % 2
    return tuple(int(x) for x in product) == tuple(v)


def gl2_order(r: int) -> int:
    """|GL_r(F_2)|"""
    return prod(2 ** r - 2 ** i for i in range(r))


def sv_order(v: ParityVector) -> int:
    """|S(v)|: all of GL_r(F_2) for v = 0, else the stabilizer of one of 2^r - 1 nonzero vectors"""
    r = len(v)
    if not any(v):
        return gl2_order(r)
    return gl2_order(r) // (2 ** r - 1)


# ---------------------------------------------------------------------------
# Constructive reduction inside S(v)

class _RowReducer:
    """Mod-2 row operations on a working copy, recording each generator applied from the left"""

    def __init__(self, m: ModMatrix):
        self.rows = m.to_array() % 2
        self.steps: List[str] = []

    def add(self, target: int, source: int):
        self.rows[target - 1] = (self.rows[target - 1] + self.rows[source - 1]) % 2
        self.steps.append(elementary_tag(target, source))

    def add_double(self, first: int, second: int, source: int):
        for target in (first, second):
            self.rows[target - 1] = (self.rows[target - 1] + self.rows[source - 1]) % 2
        self.steps.append(double_tag(first, second, source))

    def entry(self, row: int, column: int) -> int:
        return int(self.rows[row - 1, column - 1])


def sv_reduce(m: ModMatrix, v: ParityVector) -> GenWord:
    """Write M in S(v) as a product of sv_generators(v).

    Columns are cleared left to right with the allowed left row operations:
    row a += row c for v_a = 0, and rows a, b += row c together for
    v_a = v_b = 1. Every generator is an involution mod 2, so the operations
    in application order multiply back to M.
    """
    if not in_sv(m, v):
        raise PreconditionError(f"matrix {m} is not in S({''.join(map(str, v))})")

    r = m.r
    work = _RowReducer(m)
    for c in range(1, r + 1):
        # pivot repair
        if work.entry(c, c) == 0:
            j = next(row for row in range(c + 1, r + 1) if work.entry(row, c) == 1)
            if v[c - 1] == 0:
                work.add(c, j)
            else:
                partner = next((k for k in range(1, r + 1) if k not in (c, j) and v[k - 1] == 1), None)
                if partner is not None:
                    work.add_double(c, partner, j)
                else:
                    # v has its ones exactly at c and j: swap rows c and j
                    k = next((k for k in range(1, r + 1) if v[k - 1] == 0), None)
                    if k is None:
                        raise PreconditionError("swapping two rows needs a third index with v_k = 0")
                    for _ in range(2):
                        work.add(k, j)
                        work.add(k, c)
                        work.add_double(c, j, k)

        # elimination
        paired: List[int] = []
        for a in range(1, r + 1):
            if a == c or work.entry(a, c) == 0:
                continue
            if v[a - 1] == 0:
                work.add(a, c)
            else:
                paired.append(a)
        for first, second in zip(paired[::2], paired[1::2]):
            work.add_double(first, second, c)

    if not np.array_equal(work.rows, np.eye(r, dtype=np.int64)):
        raise PreconditionError(f"reduction of {m} did not reach the identity")
    return GenWord(tuple((tag, 1) for tag in work.steps))


# ---------------------------------------------------------------------------
# GL_r(Z) words

def decompose_glz(m: IntMatrix) -> GenWord:
    """Word over the X_ij and T_1 whose product is M.

    Euclidean row reduction column by column, then pairs of -1 on the
    diagonal are removed with (X_ab X_ba^-1 X_ab)^2, which is -I on the
    (a, b) block. The recorded left operations are inverted and reversed.
    """
    det = determinant(m)
    if det not in (1, -1):
        raise NotUnimodularError(f"determinant {det} is not ±1")

    r = m.rows
    rows = [[int(x) for x in row] for row in m.tolist()]
    steps: List[Tuple[str, int]] = []

    def add_multiple(target: int, source: int, factor: int):
        if factor == 0:
            return
        rows[target - 1] = [t + factor * s for t, s in zip(rows[target - 1], rows[source - 1])]
        steps.append((elementary_tag(target, source), factor))

    if det == -1:
        rows[0] = [-x for x in rows[0]]
        steps.append(("T[1]", 1))

    for c in range(1, r + 1):
        while True:
            nonzero = [p for p in range(c, r + 1) if rows[p - 1][c - 1] != 0]
            if len(nonzero) == 1:
                break
            p = min(nonzero, key=lambda row: abs(rows[row - 1][c - 1]))
            for q in nonzero:
                if q != p:
                    add_multiple(q, p, -(rows[q - 1][c - 1] // rows[p - 1][c - 1]))
        p = nonzero[0]
        if p != c:
            add_multiple(c, p, 1)
            add_multiple(p, c, -1)
        unit = rows[c - 1][c - 1]
        for a in range(1, r + 1):
            if a != c:
                add_multiple(a, c, -rows[a - 1][c - 1] * unit)

    negatives = [a for a in range(1, r + 1) if rows[a - 1][a - 1] == -1]
    for a, b in zip(negatives[::2], negatives[1::2]):
        for _ in range(2):
            add_multiple(a, b, 1)
            add_multiple(b, a, -1)
            add_multiple(a, b, 1)

    if rows != [[1 if a == b else 0 for b in range(r)] for a in range(r)]:
        raise NotUnimodularError("row reduction did not reach the identity")

    letters = tuple((tag, exponent if tag.startswith("T") else -exponent) for tag, exponent in steps)
    return GenWord(letters)


# ---------------------------------------------------------------------------
# Closure and exhaustive enumeration

def closure(gens: Sequence[ModMatrix], cap: int = CLOSURE_CAP, identity_element: Optional[ModMatrix] = None) -> FrozenSet[ModMatrix]:
    """Subgroup generated by gens, by breadth-first right multiplication"""
    if not gens and identity_element is None:
        raise PreconditionError("closure of an empty generator list needs an explicit identity")
    reference = gens[0] if gens else identity_element
    modulus, r = reference.modulus, reference.r
    for g in gens:
        if g.modulus != modulus or g.r != r:
            raise PreconditionError(f"mixed moduli or sizes in closure generators: {g.modulus} vs {modulus}")
        if not g.is_invertible():
            raise SingularMatrixError(f"generator {g} is not invertible mod {modulus}")

    unit = ModMatrix.identity(r, modulus)
    steps: List[np.ndarray] = []
    step_keys = set()
    for g in gens:
        for candidate in (g, g.inverse()):
            array = candidate.to_array()
            if candidate != unit and array.tobytes() not in step_keys:
                step_keys.add(array.tobytes())
                steps.append(array)

    start = unit.to_array()
    seen = {start.tobytes(): start}
    frontier = [start]
    while frontier:
        batch = np.stack(frontier)
        frontier = []
        for step in steps:
            for product in np.matmul(batch, step) % modulus:
                key = product.tobytes()
                if key not in seen:
                    seen[key] = product
                    frontier.append(product)
                    if len(seen) > cap:
                        raise ClosureCapExceeded(f"closure exceeded the cap of {cap} elements")

    logger.debug(f"📊 closure of {len(gens)} generators mod {modulus}: {len(seen)} elements")
    return frozenset(ModMatrix.from_array(array, modulus) for array in seen.values())


def _check_brute_force_budget(count_base: int, exponent: int):
    if count_base ** exponent > 2 ** BRUTE_FORCE_MAX_ENTRIES:
        raise PreconditionError(
            f"exhaustive enumeration of {count_base}^{exponent} matrices exceeds 2^{BRUTE_FORCE_MAX_ENTRIES}"
        )


def _all_matrices(r: int, base: int) -> np.ndarray:
    total = base ** (r * r)
    digits = np.unravel_index(np.arange(total), (base,) * (r * r))
    return np.stack(digits, axis=-1).astype(np.int64).reshape(total, r, r)


def integer_dets(arrays: np.ndarray) -> np.ndarray:
    """Exact determinants of small integer matrices (entries far below 2^26)"""
    if len(arrays) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.rint(np.linalg.det(arrays.astype(np.float64))).astype(np.int64)


def batch_inverse_mod(arrays: np.ndarray, modulus: int) -> np.ndarray:
    """Inverses mod l of a stack of matrices invertible mod l, via the adjugate"""
    if len(arrays) == 0:
        return arrays.copy()
    floats = arrays.astype(np.float64)
    dets = np.rint(np.linalg.det(floats)).astype(np.int64)
    adjugates = np.rint(dets[:, None, None] * np.linalg.inv(floats)).astype(np.int64)
    unit_inverse = np.zeros(modulus, dtype=np.int64)
    for u in range(1, modulus):
        if gcd(u, modulus) == 1:
            unit_inverse[u] = pow(u, -1, modulus)
    return (adjugates % modulus) * unit_inverse[dets % modulus][:, None, None] % modulus


def enumerate_gl(r: int, modulus: int) -> np.ndarray:
    """Every element of GL_r(Z/lZ) as a (count, r, r) array, lexicographic in the entries"""
    if r < 1:
        raise PreconditionError(f"rank must be positive, got {r}")
    _check_brute_force_budget(modulus, r * r)
    matrices = _all_matrices(r, modulus)
    dets = integer_dets(matrices) % modulus
    units = np.gcd(dets, modulus) == 1
    logger.debug(f"📊 GL_{r}(Z/{modulus}): {int(units.sum())} of {len(matrices)} matrices invertible")
    return matrices[units]


def as_mod_matrices(arrays: np.ndarray, modulus: int) -> FrozenSet[ModMatrix]:
    return frozenset(ModMatrix.from_array(array, modulus) for array in arrays)


def sv_bruteforce(v: ParityVector) -> FrozenSet[ModMatrix]:
    """{M in GL_r(F_2) : v · M = v} by filtering every invertible matrix"""
    matrices = enumerate_gl(len(v), 2)
    products = np.einsum("i,nij->nj", np.array(v, dtype=np.int64), matrices) % 2
    keep = np.all(products == np.array(v, dtype=np.int64), axis=1)
    return as_mod_matrices(matrices[keep], 2)


def principal_kernel(r: int, modulus: int, level: int) -> FrozenSet[ModMatrix]:
    """Kernel of GL_r(Z/modulus) -> GL_r(Z/level): invertible I + level*A"""
    if modulus % level != 0:
        raise PreconditionError(f"level {level} does not divide modulus {modulus}")
    quotient = modulus // level
    _check_brute_force_budget(quotient, r * r)
    matrices = (np.eye(r, dtype=np.int64) + level * _all_matrices(r, quotient)) % modulus
    units = np.gcd(integer_dets(matrices) % modulus, modulus) == 1
    return as_mod_matrices(matrices[units], modulus)

