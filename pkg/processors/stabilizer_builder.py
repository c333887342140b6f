from dataclasses import dataclass
from typing import Dict, List, Optional
import logging

from algebra.errors import CertificateError, PreconditionError
from algebra.free_group import (
    Endo,
    Word,
    commutator as endo_commutator,
    compose,
    contains_generator,
    format_word,
    generator,
    identity_endo,
    identity_word,
    in_derived_subgroup,
    prefixed,
    tau,
)
from algebra.loop_subgroup import LoopSubgroup
from algebra.matrix_group import (
    IntMatrix,
    commutator as matrix_commutator,
    diag_t,
    elementary,
    gamma2_alt_generator_names,
    gamma2_generator_names,
    invert,
    matrix_rows,
    resolve_tag,
    sv_generator_names,
    tag_factors,
)
from algebra.permutation import Permutation, decompose_even, substitute


@dataclass(frozen=True)
class CertifiedStabilizer:
    """An automorphism of F_r stabilizing U, with inverse witness, claimed B-image and coset map.

    The coset map P describes how gamma acts on the coset action:
    pi(gamma(g_l)) = P ∘ pi(g_l) ∘ P^-1 for every l, with P(U) = U.
    P is the identity for every prefix construction and the loop reversal for tau.
    """

    gamma: Endo
    gamma_inverse: Endo
    target: IntMatrix
    witness: Word
    construction: str
    name: str
    coset_map: Permutation

    def inverse_holds(self) -> bool:
        identity = identity_endo(self.gamma.rank)
        return (
            compose(self.gamma, self.gamma_inverse) == identity
            and compose(self.gamma_inverse, self.gamma) == identity
        )

    def b_image_holds(self) -> bool:
        return self.gamma.b_matrix() == self.target

    def coset_action_holds(self, U: LoopSubgroup) -> bool:
        P = self.coset_map
        if P(1) != 1:
            return False
        P_inverse = P.inverse()
        for l in range(1, U.r + 1):
            expected = P.compose(U.pi_generator(l)).compose(P_inverse)
            if U.pi_word(self.gamma.image(l)) != expected:
                return False
        return True

    def basis_preserved(self, U: LoopSubgroup) -> bool:
        """gamma and its inverse map every basis word of U back into U"""
        return all(
            U.contains(self.gamma.apply(u)) and U.contains(self.gamma_inverse.apply(u))
            for u in U.basis()
        )

    def certificate(self, U: LoopSubgroup, with_basis: bool = False) -> Dict[str, bool]:
        checks = {
            "inverse": self.inverse_holds(),
            "b_image": self.b_image_holds(),
            "coset_action": self.coset_action_holds(U),
            "derived_witness": in_derived_subgroup(self.witness),
        }
        if with_basis:
            checks["basis_preserved"] = self.basis_preserved(U)
        return checks

    def compose(self, other: "CertifiedStabilizer", name: Optional[str] = None) -> "CertifiedStabilizer":
        """self after other"""
        return CertifiedStabilizer(
            gamma=compose(self.gamma, other.gamma),
            gamma_inverse=compose(other.gamma_inverse, self.gamma_inverse),
            target=self.target * other.target,
            witness=identity_word(self.gamma.rank),
            construction="product",
            name=name or f"{self.name} {other.name}",
            coset_map=self.coset_map.compose(other.coset_map),
        )

    def inverse(self) -> "CertifiedStabilizer":
        return CertifiedStabilizer(
            gamma=self.gamma_inverse,
            gamma_inverse=self.gamma,
            target=invert(self.target),
            witness=self.witness.inverse(),
            construction=self.construction,
            name=f"({self.name})^-1",
            coset_map=self.coset_map.inverse(),
        )

    def commutator(self, other: "CertifiedStabilizer", name: Optional[str] = None) -> "CertifiedStabilizer":
        """[self, other] = self other self^-1 other^-1"""
        P, Q = self.coset_map, other.coset_map
        return CertifiedStabilizer(
            gamma=endo_commutator(self.gamma, other.gamma, self.gamma_inverse, other.gamma_inverse),
            gamma_inverse=endo_commutator(other.gamma, self.gamma, other.gamma_inverse, self.gamma_inverse),
            target=matrix_commutator(self.target, other.target),
            witness=identity_word(self.gamma.rank),
            construction="commutator",
            name=name or f"[{self.name}, {other.name}]",
            coset_map=P.compose(Q).compose(P.inverse()).compose(Q.inverse()),
        )

    def summary(self, U: LoopSubgroup) -> Dict:
        """Plain data for reports"""
        return {
            "name": self.name,
            "construction": self.construction,
            "images": self.gamma.formatted_images(),
            "inverse_images": self.gamma_inverse.formatted_images(),
            "witness": format_word(self.witness),
            "b_matrix": matrix_rows(self.target),
            "coset_map": str(self.coset_map),
            "certificate": self.certificate(U, with_basis=True),
        }


class StabilizerBuilder:
    """Build certified preimages of matrix generators in the stabilizer of a loop subgroup"""

    def __init__(self, loop_subgroup: LoopSubgroup):
        self.U = loop_subgroup
        self.r = loop_subgroup.r
        self.logger = logging.getLogger(__name__)

    # ------------------------------------------------------------------
    # Primitive constructions

    def _certify(self, stabilizer: CertifiedStabilizer) -> CertifiedStabilizer:
        """Raise CertificateError unless every certificate check passes"""
        checks = stabilizer.certificate(self.U)
        failed = [name for name, passed in checks.items() if not passed]
        if failed:
            self.logger.error(f"❌ {stabilizer.name} on {self.U} failed: {', '.join(failed)}")
            raise CertificateError(f"{stabilizer.name} on {self.U} failed its certificate: {', '.join(failed)}")
        return stabilizer

    def core_prefix(self, j: int, prefix: Word, target: IntMatrix, construction: str, name: str,
                    witness: Optional[Word] = None) -> CertifiedStabilizer:
        """g_j -> prefix·g_j for a prefix in the normal core of U that avoids g_j"""
        if contains_generator(prefix, j):
            raise PreconditionError(f"prefix for g_{j} must not contain g_{j}")
        if not self.U.in_normal_core(prefix):
            raise PreconditionError(f"prefix for {name} does not act trivially on the cosets of {self.U}")
        gamma = prefixed(self.r, j, prefix)
        stabilizer = CertifiedStabilizer(
            gamma=gamma,
            gamma_inverse=gamma.inverse_of_prefix_form(),
            target=target,
            witness=witness if witness is not None else identity_word(self.r),
            construction=construction,
            name=name,
            coset_map=Permutation.identity(self.U.coset_count()),
        )
        return self._certify(stabilizer)

    def tau(self, j: int) -> CertifiedStabilizer:
        """Inversion of g_j; it reverses loop j"""
        inversion = tau(j, self.r)
        return self._certify(CertifiedStabilizer(
            gamma=inversion,
            gamma_inverse=inversion,
            target=diag_t(j, self.r),
            witness=identity_word(self.r),
            construction="tau",
            name=f"T[{j}]",
            coset_map=self.U.loop_reversal(j),
        ))

    # ------------------------------------------------------------------
    # Auxiliary loops and witness words

    def auxiliary_loop(self, *excluded: int) -> Optional[int]:
        """Smallest k outside excluded with s_k > 1"""
        for k in range(1, self.r + 1):
            if k not in excluded and self.U.loop_length(k) > 1:
                return k
        return None

    def _check_distinct(self, *indices: int):
        for index in indices:
            self.U.loop_length(index)
        if len(set(indices)) != len(indices):
            raise PreconditionError(f"indices {indices} must be distinct")

    def witness_word(self, i: int, k: int, local_target: Permutation) -> Word:
        """Word in g_i, g_k with zero exponent sums acting on the loops i, k as local_target"""
        restriction = self.U.restrict_to_loops(i, k)
        sw_word = decompose_even(local_target, restriction.m)
        return substitute(sw_word, i, k, self.r)

    # ------------------------------------------------------------------
    # Preimages of generators

    def preimage_elementary(self, i: int, j: int) -> CertifiedStabilizer:
        """g_j -> w·g_i·g_j with B-image X_ij, for odd s_i"""
        self._check_distinct(i, j)
        s_i = self.U.loop_length(i)
        name = f"X[{i},{j}]"
        if s_i % 2 == 0:
            raise PreconditionError(f"{name} needs an odd loop length s_{i}, got {s_i}")
        g_i = generator(self.r, i)
        if s_i == 1:
            return self.core_prefix(j, g_i, elementary(i, j, self.r), "trivial-looplet", name)

        k = self.auxiliary_loop(i, j)
        if k is None:
            raise PreconditionError(
                f"{name} needs s_{i} = 1 or another loop k outside {{{i},{j}}} with s_k > 1 on {self.U}"
            )
        sigma = self.U.restrict_to_loops(i, k).sigma
        w = self.witness_word(i, k, sigma.inverse())
        self.logger.debug(f"🔍 {name} on {self.U}: auxiliary loop {k}, witness of {len(w.array_form)} syllables")
        return self.core_prefix(j, w * g_i, elementary(i, j, self.r), "odd", name, witness=w)

    def preimage_elementary_squared(self, i: int, j: int) -> CertifiedStabilizer:
        """g_j -> w·g_i^2·g_j with B-image X_ij^2"""
        self._check_distinct(i, j)
        target = elementary(i, j, self.r) ** 2
        name = f"X[{i},{j}]^2"
        g_i_squared = generator(self.r, i) ** 2
        if self.U.loop_length(i) == 1:
            return self.core_prefix(j, g_i_squared, target, "trivial-looplet", name)

        k = self.auxiliary_loop(i, j)
        if k is None:
            raise PreconditionError(
                f"{name} needs s_{i} = 1 or another loop k outside {{{i},{j}}} with s_k > 1 on {self.U}"
            )
        sigma = self.U.restrict_to_loops(i, k).sigma
        w = self.witness_word(i, k, sigma.power(-2))
        return self.core_prefix(j, w * g_i_squared, target, "squared", name, witness=w)

    def preimage_double(self, i: int, j: int, k: int) -> CertifiedStabilizer:
        """g_k -> w·g_i·g_j·g_k with B-image X_ik X_jk, for even s_i and s_j"""
        self._check_distinct(i, j, k)
        name = f"X[{i},{k}]X[{j},{k}]"
        s_i, s_j = self.U.loop_length(i), self.U.loop_length(j)
        if s_i % 2 or s_j % 2:
            raise PreconditionError(f"{name} needs even loop lengths s_{i}, s_{j}, got {s_i}, {s_j}")
        restriction = self.U.restrict_to_loops(i, j)
        w = self.witness_word(i, j, restriction.sigma.compose(restriction.omega).inverse())
        prefix = w * generator(self.r, i) * generator(self.r, j)
        target = elementary(i, k, self.r) * elementary(j, k, self.r)
        return self.core_prefix(k, prefix, target, "double", name, witness=w)

    def preimage_via_commutator(self, i: int, j: int) -> CertifiedStabilizer:
        """[gamma for X_ik, gamma for X_kj] with B-image X_ij, k a looplet"""
        self._check_distinct(i, j)
        s_i, s_j = self.U.loop_length(i), self.U.loop_length(j)
        others = [k for k in range(1, self.r + 1) if k not in (i, j)]
        if s_i % 2 == 0 or s_i == 1 or s_j == 1 or not others or any(self.U.loop_length(k) > 1 for k in others):
            raise PreconditionError(
                f"commutator route for X[{i},{j}] needs odd s_{i} > 1, s_{j} > 1 and looplets elsewhere on {self.U}"
            )
        k = others[0]
        first = self.preimage_elementary(i, k)
        second = self.preimage_elementary(k, j)
        result = first.commutator(second, name=f"X[{i},{j}]")
        if result.target != elementary(i, j, self.r):
            raise CertificateError(f"commutator of {first.name} and {second.name} is not X[{i},{j}]")
        return self._certify(result)

    # ------------------------------------------------------------------
    # Generator families

    def _check_theorem_range(self):
        if self.r < 3:
            raise PreconditionError(f"rank r >= 3 required, got r = {self.r}")
        if self.U.looplet_count() > self.r - 2:
            raise PreconditionError(
                f"{self.U} has {self.U.looplet_count()} looplets; at most r - 2 = {self.r - 2} allowed"
            )

    def gamma2_preimages(self) -> List[CertifiedStabilizer]:
        """Preimages of X_ij^2 and T_j, or of the alternative set anchored at a looplet"""
        self._check_theorem_range()
        stabilizers = []
        if self.U.looplet_count() <= self.r - 3:
            for tag in gamma2_generator_names(self.r):
                stabilizers.append(self._preimage_for_tag(tag))
        else:
            anchor = self.U.looplets()[0]
            for tag in gamma2_alt_generator_names(anchor, self.r):
                stabilizers.append(self._preimage_for_tag(tag))
        self.logger.info(f"✅ {len(stabilizers)} level-2 preimages on {self.U}")
        return stabilizers

    def sv_preimages(self) -> List[CertifiedStabilizer]:
        """Preimages whose B-images reduce to the S(v) generators"""
        self._check_theorem_range()
        stabilizers = [self._preimage_for_tag(tag) for tag in sv_generator_names(self.U.parity_vector())]
        self.logger.info(f"✅ {len(stabilizers)} S(v) preimages on {self.U}")
        return stabilizers

    def _preimage_for_tag(self, tag: str) -> CertifiedStabilizer:
        """Dispatch a generator tag to the construction that covers it"""
        factors = tag_factors(tag)
        kind, i, j = factors[0]
        if kind == "T":
            return self.tau(i)
        if len(factors) == 2 and factors[1][1:] == factors[0][1:]:
            return self.preimage_elementary_squared(i, j)
        if len(factors) == 2:
            return self.preimage_double(i, factors[1][1], j)
        if self.U.loop_length(i) == 1 or self.auxiliary_loop(i, j) is not None:
            return self.preimage_elementary(i, j)
        return self.preimage_via_commutator(i, j)

    def preimage(self, kind: str, i: int, j: int, k: Optional[int] = None) -> CertifiedStabilizer:
        """Single construction by name, as used from the command line"""
        if kind == "odd":
            return self.preimage_elementary(i, j)
        if kind == "squared":
            return self.preimage_elementary_squared(i, j)
        if kind == "double":
            if k is None:
                raise PreconditionError("the double construction needs --k")
            return self.preimage_double(i, j, k)
        if kind == "commutator":
            return self.preimage_via_commutator(i, j)
        if kind == "tau":
            return self.tau(i)
        raise PreconditionError(f"unknown construction {kind!r}")

    def check_target(self, stabilizer: CertifiedStabilizer, tag: str) -> bool:
        return stabilizer.target == resolve_tag(tag, self.r)
