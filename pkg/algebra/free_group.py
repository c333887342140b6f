"""
Reduced words in the free group F_r and endomorphisms given by generator images.

Words are sympy free group elements, which are stored in syllable form
((generator symbol, exponent), ...) and freely reduced on multiplication.
Generators are addressed by 1-based index throughout this package.
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple

from sympy import ImmutableMatrix
from sympy.combinatorics.free_groups import FreeGroup, FreeGroupElement, free_group

from algebra.errors import PreconditionError
from config import SMALL_RANK_GENERATOR_NAMES

Word = FreeGroupElement
AbelianVector = Tuple[int, ...]

_TOKEN = re.compile(r"([A-Za-z][A-Za-z0-9_]*)(?:\^\(?(-?\d+)\)?)?")


def generator_names(r: int) -> Tuple[str, ...]:
    """x, y, z for rank up to 3, g1..gr otherwise"""
    if r < 1:
        raise PreconditionError(f"rank must be positive, got {r}")
    if r <= len(SMALL_RANK_GENERATOR_NAMES):
        return SMALL_RANK_GENERATOR_NAMES[:r]
    return tuple(f"g{i}" for i in range(1, r + 1))


@lru_cache(maxsize=None)
def free_group_of_rank(r: int) -> FreeGroup:
    group, *_ = free_group(", ".join(generator_names(r)))
    return group


def generator(r: int, i: int) -> Word:
    """The i-th generator g_i of F_r (1-based)"""
    if not 1 <= i <= r:
        raise PreconditionError(f"generator index {i} outside 1..{r}")
    return free_group_of_rank(r).generators[i - 1]


def identity_word(r: int) -> Word:
    return free_group_of_rank(r).identity


def rank_of(w: Word) -> int:
    return w.group.rank


def _index_of(w: Word, symbol) -> int:
    return w.group.symbols.index(symbol) + 1


def syllables(w: Word) -> Tuple[Tuple[int, int], ...]:
    """Run-length form ((gen_index, exponent), ...) of a reduced word"""
    return tuple((_index_of(w, symbol), exponent) for symbol, exponent in w.array_form)


def freely_reduce(group: FreeGroup, pieces: Iterable[Tuple[object, int]]) -> Word:
    """One stack pass over (symbol, exponent) syllables: merge equal neighbours, drop zeros"""
    stack: List[List] = []
    for symbol, exponent in pieces:
        if stack and stack[-1][0] == symbol:
            stack[-1][1] += exponent
            if stack[-1][1] == 0:
                stack.pop()
        elif exponent != 0:
            stack.append([symbol, exponent])
    return group.dtype(tuple((symbol, exponent) for symbol, exponent in stack))


def word_from_syllables(r: int, pieces: Iterable[Tuple[int, int]]) -> Word:
    """Build and freely reduce a word from (gen_index, exponent) pairs"""
    group = free_group_of_rank(r)
    pieces = list(pieces)
    for index, _ in pieces:
        if not 1 <= index <= r:
            raise PreconditionError(f"generator index {index} outside 1..{r}")
    return freely_reduce(group, ((group.symbols[index - 1], exponent) for index, exponent in pieces))


def multiply(u: Word, v: Word) -> Word:
    if u.group != v.group:
        raise PreconditionError("words live in free groups of different rank")
    return u * v


def invert(w: Word) -> Word:
    return w.inverse()


def exponent_sum(w: Word, i: int) -> int:
    """Signed number of occurrences of g_i in w"""
    return w.exponent_sum(generator(rank_of(w), i))


def abelianize(w: Word) -> AbelianVector:
    """All exponent sums of w in one pass over its syllables"""
    sums = [0] * rank_of(w)
    for index, exponent in syllables(w):
        sums[index - 1] += exponent
    return tuple(sums)


def in_derived_subgroup(w: Word) -> bool:
    """True iff every generator occurs with exponent sum zero, i.e. w in [F_r, F_r]"""
    return not any(abelianize(w))


def contains_generator(w: Word, i: int) -> bool:
    return any(index == i for index, _ in syllables(w))


def commutator_word(u: Word, v: Word) -> Word:
    """[u, v] = u v u^-1 v^-1"""
    return u * v * u.inverse() * v.inverse()


def format_word(w: Word) -> str:
    """Render a word as 'x y^-1 z^2'; the identity renders as '1'"""
    if w.is_identity:
        return "1"
    parts = []
    for symbol, exponent in w.array_form:
        parts.append(str(symbol) if exponent == 1 else f"{symbol}^{exponent}")
    return " ".join(parts)


def parse_word(text: str, r: int) -> Word:
    """Parse 'y x y^-1 x' (also '*'/'·' separated) into a word of F_r"""
    names = generator_names(r)
    cleaned = text.replace("*", " ").replace("·", " ").replace("⁻¹", "^-1").strip()
    if cleaned in ("", "1", "e", "id"):
        return identity_word(r)

    pieces: List[Tuple[int, int]] = []
    position = 0
    for match in _TOKEN.finditer(cleaned):
        gap = cleaned[position:match.start()]
        if gap.strip():
            raise ValueError(f"unexpected text {gap.strip()!r} in word {text!r}")
        name, power = match.group(1), match.group(2)
        if name not in names:
            raise ValueError(f"unknown generator {name!r} for rank {r} (expected one of {names})")
        pieces.append((names.index(name) + 1, int(power) if power is not None else 1))
        position = match.end()
    if cleaned[position:].strip():
        raise ValueError(f"unexpected trailing text in word {text!r}")
    return word_from_syllables(r, pieces)


@dataclass(frozen=True)
class Endo:
    """Endomorphism of F_r given by the images of g_1..g_r.

    Invertibility is not part of the type; constructions that must be
    automorphisms carry an explicit inverse witness.
    """

    images: Tuple[Word, ...]

    def __post_init__(self):
        if not self.images:
            raise PreconditionError("an endomorphism needs at least one generator image")
        group = self.images[0].group
        if any(image.group != group for image in self.images):
            raise PreconditionError("generator images live in different free groups")
        if len(self.images) != group.rank:
            raise PreconditionError(
                f"expected {group.rank} generator images, got {len(self.images)}"
            )

    @property
    def rank(self) -> int:
        return len(self.images)

    def image(self, j: int) -> Word:
        return self.images[j - 1]

    def apply(self, w: Word) -> Word:
        """Homomorphic extension of the generator images, freely reduced"""
        if rank_of(w) != self.rank:
            raise PreconditionError(f"word of rank {rank_of(w)} applied to rank {self.rank} endomorphism")
        pieces: List[Tuple[object, int]] = []
        for index, exponent in syllables(w):
            image = self.images[index - 1]
            block = image.array_form if exponent > 0 else image.inverse().array_form
            pieces.extend(block * abs(exponent))
        return freely_reduce(w.group, pieces)

    def compose(self, other: "Endo") -> "Endo":
        """self after other: g_j -> self(other(g_j))"""
        if other.rank != self.rank:
            raise PreconditionError("cannot compose endomorphisms of different rank")
        return Endo(tuple(self.apply(image) for image in other.images))

    def compose_size_bound(self, other: "Endo") -> int:
        """Syllable count of self.compose(other) before free reduction"""
        lengths = [len(image.array_form) for image in self.images]
        return sum(
            lengths[index - 1] * abs(exponent)
            for image in other.images
            for index, exponent in syllables(image)
        )

    def b_matrix(self) -> ImmutableMatrix:
        """Entry (i, j) counts g_i in the image of g_j"""
        columns = [abelianize(image) for image in self.images]
        return ImmutableMatrix(self.rank, self.rank, lambda i, j: columns[j][i])

    def is_identity(self) -> bool:
        return all(image == generator(self.rank, j) for j, image in enumerate(self.images, 1))

    def size(self) -> int:
        """Total number of syllables over all generator images"""
        return sum(len(image.array_form) for image in self.images)

    def prefix_form(self) -> Tuple[int, Word]:
        """Return (j, p) if self is g_j -> p*g_j with p free of g_j and all other generators fixed"""
        moved = [j for j, image in enumerate(self.images, 1) if image != generator(self.rank, j)]
        if len(moved) != 1:
            raise PreconditionError("not of prefix form: expected exactly one moved generator")
        j = moved[0]
        prefix = self.images[j - 1] * generator(self.rank, j).inverse()
        if contains_generator(prefix, j):
            raise PreconditionError(f"not of prefix form: prefix contains g_{j}")
        return j, prefix

    def inverse_of_prefix_form(self) -> "Endo":
        """Closed-form inverse of g_j -> p*g_j (p free of g_j): g_j -> p^-1*g_j"""
        j, prefix = self.prefix_form()
        return prefixed(self.rank, j, prefix.inverse())

    def formatted_images(self) -> List[str]:
        return [format_word(image) for image in self.images]

    def __str__(self) -> str:
        return "(" + ", ".join(self.formatted_images()) + ")"


def identity_endo(r: int) -> Endo:
    return Endo(tuple(free_group_of_rank(r).generators))


def from_images(images: Sequence[Word]) -> Endo:
    return Endo(tuple(images))


def prefixed(r: int, j: int, prefix: Word) -> Endo:
    """g_j -> prefix*g_j, every other generator fixed"""
    images = list(free_group_of_rank(r).generators)
    images[j - 1] = prefix * images[j - 1]
    return Endo(tuple(images))


def tau(j: int, r: int) -> Endo:
    """Invert the j-th generator, fix the others"""
    images = list(free_group_of_rank(r).generators)
    images[j - 1] = generator(r, j).inverse()
    return Endo(tuple(images))


def apply(e: Endo, w: Word) -> Word:
    return e.apply(w)


def compose(e: Endo, f: Endo) -> Endo:
    return e.compose(f)


def b_matrix(e: Endo) -> ImmutableMatrix:
    return e.b_matrix()


def commutator(e: Endo, f: Endo, e_inverse: Endo, f_inverse: Endo) -> Endo:
    """[e, f] = e∘f∘e^-1∘f^-1; the inverses are taken as given"""
    if len({e.rank, f.rank, e_inverse.rank, f_inverse.rank}) != 1:
        raise PreconditionError("cannot form a commutator of endomorphisms of different rank")
    return e.compose(f.compose(e_inverse.compose(f_inverse)))
