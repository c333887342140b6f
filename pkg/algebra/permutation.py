"""
Permutations of the points 1..n and two-generator words evaluating to them.

Composition is right-to-left: compose(f, g) applies g first, so
compose(f, g)(p) == f(g(p)). Every even permutation is written as a word in
S and W (the cycles sigma = (1..m) and omega = (1, m+1..n)) whose S and W
exponent sums are both zero.
"""

import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple

from sympy.combinatorics import Permutation as SymPermutation
from sympy.combinatorics.free_groups import FreeGroup, FreeGroupElement, free_group

from algebra.errors import ParityError, PreconditionError
from algebra.free_group import Word, generator, identity_word

logger = logging.getLogger(__name__)

SWWord = FreeGroupElement
Cycle = Tuple[int, ...]

_CYCLE = re.compile(r"\(([^()]*)\)")


@dataclass(frozen=True)
class Permutation:
    """Bijection of {1..n}, backed by a 0-based sympy permutation"""

    perm: SymPermutation

    @property
    def size(self) -> int:
        return self.perm.size

    def __call__(self, point: int) -> int:
        if not 1 <= point <= self.size:
            raise PreconditionError(f"point {point} outside 1..{self.size}")
        return self.perm.array_form[point - 1] + 1

    @property
    def mapping(self) -> Tuple[int, ...]:
        return tuple(image + 1 for image in self.perm.array_form)

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other"""
        if self.size != other.size:
            raise PreconditionError(f"cannot compose permutations of {self.size} and {other.size} points")
        # sympy multiplies left-to-right
        return Permutation(other.perm * self.perm)

    def inverse(self) -> "Permutation":
        return Permutation(~self.perm)

    def power(self, exponent: int) -> "Permutation":
        return Permutation(self.perm ** exponent)

    def parity(self) -> int:
        """0 for even, 1 for odd"""
        return self.perm.parity()

    def is_even(self) -> bool:
        return self.parity() == 0

    def is_identity(self) -> bool:
        return self.perm.is_Identity

    def moved_points(self) -> List[int]:
        return [p for p, image in enumerate(self.mapping, 1) if p != image]

    def cycles(self) -> List[Cycle]:
        """Non-trivial cycles, each starting at its smallest point, sorted by that point"""
        result = []
        for cycle in self.perm.cyclic_form:
            shifted = [point + 1 for point in cycle]
            start = shifted.index(min(shifted))
            result.append(tuple(shifted[start:] + shifted[:start]))
        return sorted(result)

    def __str__(self) -> str:
        cycles = self.cycles()
        if not cycles:
            return "()"
        return "".join("(" + ",".join(str(p) for p in cycle) + ")" for cycle in cycles)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        if n < 1:
            raise PreconditionError(f"a permutation needs at least one point, got n={n}")
        return cls(SymPermutation(size=n))

    @classmethod
    def from_mapping(cls, mapping: Sequence[int]) -> "Permutation":
        n = len(mapping)
        if sorted(mapping) != list(range(1, n + 1)):
            raise PreconditionError(f"mapping {tuple(mapping)} is not a bijection of 1..{n}")
        return cls(SymPermutation([image - 1 for image in mapping]))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], n: int) -> "Permutation":
        """Product of disjoint cycles on 1..n"""
        mapping = list(range(1, n + 1))
        seen = set()
        for cycle in cycles:
            cycle = list(cycle)
            for point in cycle:
                if not 1 <= point <= n:
                    raise PreconditionError(f"cycle point {point} outside 1..{n}")
                if point in seen:
                    raise PreconditionError(f"point {point} appears twice in the cycles")
                seen.add(point)
            for position, point in enumerate(cycle):
                mapping[point - 1] = cycle[(position + 1) % len(cycle)]
        return cls.from_mapping(mapping)


def compose(f: Permutation, g: Permutation) -> Permutation:
    return f.compose(g)


def parity(p: Permutation) -> int:
    return p.parity()


def cycles(p: Permutation) -> List[Cycle]:
    return p.cycles()


def parse_cycles(text: str, n: int) -> Permutation:
    """Parse '(1,2,4)(3,5)' on n points; '()' or '' is the identity"""
    stripped = text.strip()
    if _CYCLE.sub("", stripped).strip():
        raise ValueError(f"could not parse cycle notation {text!r}")
    parsed = []
    for body in _CYCLE.findall(stripped):
        points = [piece for piece in re.split(r"[,\s]+", body.strip()) if piece]
        if points:
            parsed.append([int(point) for point in points])
    return Permutation.from_cycles(parsed, n)


@lru_cache(maxsize=None)
def sw_group() -> FreeGroup:
    group, _, _ = free_group("S, W")
    return group


def sw_letters() -> Tuple[SWWord, SWWord]:
    s, w = sw_group().generators
    return s, w


def sw_exponent_sums(w: SWWord) -> Tuple[int, int]:
    s, omega = sw_letters()
    return w.exponent_sum(s), w.exponent_sum(omega)


def standard_cycles(m: int, n: int) -> Tuple[Permutation, Permutation]:
    """sigma = (1..m) and omega = (1, m+1..n)"""
    _check_cycle_shape(m, n)
    sigma = Permutation.from_cycles([range(1, m + 1)], n)
    omega = Permutation.from_cycles([[1, *range(m + 1, n + 1)]], n)
    return sigma, omega


def _check_cycle_shape(m: int, n: int):
    if not 1 < m < n:
        raise PreconditionError(f"need 1 < m < n for the two cycles, got m={m}, n={n}")


def _through_one(i: int, j: int, m: int) -> SWWord:
    """Word for the 3-cycle (1, i, j), i and j distinct points other than 1"""
    s, w = sw_letters()
    if i <= m < j:
        a, b = s ** (i - 1), w ** (j - m)
        return a * b * a.inverse() * b.inverse()
    if j <= m < i:
        return _through_one(j, i, m).inverse()
    if i <= m and j <= m:
        return _through_one(j, m + 1, m).inverse() * _through_one(i, m + 1, m)
    return _through_one(2, j, m) * _through_one(2, i, m).inverse()


def three_cycle_word(k: int, i: int, j: int, m: int, n: int) -> SWWord:
    """SW-word evaluating to the 3-cycle (k, i, j) at sigma = (1..m), omega = (1, m+1..n)"""
    _check_cycle_shape(m, n)
    points = (k, i, j)
    if len(set(points)) != 3 or not all(1 <= p <= n for p in points):
        raise PreconditionError(f"({k},{i},{j}) is not a 3-cycle on 1..{n}")

    if 1 in points:
        start = points.index(1)
        _, a, b = points[start:] + points[:start]
        return _through_one(a, b, m)

    # conjugate by the full cycle omega∘sigma = (1, 2, ..., n)
    s, w = sw_letters()
    rotation = (w * s) ** (k - 1)
    shifted = _through_one((i - k) % n + 1, (j - k) % n + 1, m)
    return rotation * shifted * rotation.inverse()


def three_cycle_factors(target: Permutation) -> List[Cycle]:
    """Factor an even permutation as c_1∘c_2∘...∘c_t with each c a 3-cycle"""
    if not target.is_even():
        raise ParityError(f"{target} is odd and has no 3-cycle factorization")

    factors: List[Cycle] = []
    current = target
    while not current.is_identity():
        moved = current.moved_points()
        p = moved[0]
        q = current(p)
        x = current(q)
        if x == p:
            x = next(point for point in moved if point not in (p, q))
        factor = (p, q, x)
        factors.append(factor)
        current = Permutation.from_cycles([factor], target.size).inverse().compose(current)
    return factors


def decompose_even(target: Permutation, m: int) -> SWWord:
    """SW-word with zero exponent sums evaluating to the even permutation target"""
    n = target.size
    _check_cycle_shape(m, n)
    word = sw_group().identity
    factors = three_cycle_factors(target)
    for factor in factors:
        word = word * three_cycle_word(*factor, m=m, n=n)
    logger.debug(f"🔍 {target} on {n} points: {len(factors)} three-cycles, {len(word.array_form)} syllables")
    return word


def evaluate(w: SWWord, sigma: Permutation, omega: Permutation) -> Permutation:
    """Substitute sigma for S and omega for W, composing right-to-left"""
    if sigma.size != omega.size:
        raise PreconditionError("sigma and omega act on different point sets")
    s, _ = sw_letters()
    result = Permutation.identity(sigma.size)
    for symbol, exponent in w.array_form:
        base = sigma if symbol == s.array_form[0][0] else omega
        result = result.compose(base.power(exponent))
    return result


def substitute(w: SWWord, i: int, k: int, r: int) -> Word:
    """Rewrite an SW-word in F_r with S -> g_i and W -> g_k"""
    if i == k:
        raise PreconditionError(f"substitution needs two distinct generators, got i = k = {i}")
    s, _ = sw_letters()
    g_i, g_k = generator(r, i), generator(r, k)
    result = identity_word(r)
    for symbol, exponent in w.array_form:
        result = result * (g_i if symbol == s.array_form[0][0] else g_k) ** exponent
    return result
