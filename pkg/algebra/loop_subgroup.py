"""
Loop subgroups of F_r and the coset action pi.

Coset labels: U is 1, and g_i^t U (1 <= t < s_i) is 1 + offset_i + t where
offset_i = sum of (s_l - 1) over l < i. Membership and normal-core tests go
through pi only.
"""

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Tuple

import networkx as nx

from algebra.errors import PreconditionError
from algebra.free_group import Word, generator, generator_names, syllables
from algebra.permutation import Permutation, standard_cycles

ParityVector = Tuple[int, ...]

_DOT_NODE = re.compile(r'^\s*(\d+)\s*\[label="([^"]*)"\];\s*$')
_DOT_EDGE = re.compile(r'^\s*(\d+)\s*->\s*(\d+)\s*\[label="([^"]*)"\];\s*$')


@dataclass(frozen=True)
class LoopRestriction:
    """The cosets U, g_i^t U, g_k^t U relabelled so pi(g_i), pi(g_k) become (1..m), (1, m+1..n)"""

    m: int
    n: int
    sigma: Permutation
    omega: Permutation
    relabel: Dict[int, int]

    def lift(self, local: Permutation, full_size: int) -> Permutation:
        """Extend a permutation of the local labels to all cosets, fixing the rest"""
        back = {local_label: label for label, local_label in self.relabel.items()}
        mapping = list(range(1, full_size + 1))
        for label, local_label in self.relabel.items():
            mapping[label - 1] = back[local(local_label)]
        return Permutation.from_mapping(mapping)

    def restrict(self, full: Permutation) -> Permutation:
        """Read off the action on the relabelled cosets; full must preserve them"""
        back = {local_label: label for label, local_label in self.relabel.items()}
        mapping = []
        for local_label in range(1, self.n + 1):
            image = full(back[local_label])
            if image not in self.relabel:
                raise PreconditionError(f"coset {back[local_label]} leaves the two loops under {full}")
            mapping.append(self.relabel[image])
        return Permutation.from_mapping(mapping)


@dataclass(frozen=True)
class LoopSubgroup:
    """The s_1/.../s_r loop subgroup: one cycle of length s_i through U per generator"""

    loops: Tuple[int, ...]

    def __post_init__(self):
        if len(self.loops) < 2:
            raise PreconditionError(f"a loop subgroup needs rank r >= 2, got loops {self.loops}")
        if any(s < 1 for s in self.loops):
            raise PreconditionError(f"loop lengths must be >= 1, got {self.loops}")

    @classmethod
    def parse(cls, text: str) -> "LoopSubgroup":
        """Accept '3,3,1' or '3/3/1'"""
        pieces = [piece for piece in re.split(r"[,/\s]+", text.strip()) if piece]
        try:
            loops = tuple(int(piece) for piece in pieces)
        except ValueError:
            raise PreconditionError(f"loop lengths must be integers, got {text!r}")
        return cls(loops)

    def __str__(self) -> str:
        return "/".join(str(s) for s in self.loops)

    @property
    def r(self) -> int:
        return len(self.loops)

    def loop_length(self, i: int) -> int:
        self._check_index(i)
        return self.loops[i - 1]

    def _check_index(self, i: int):
        if not 1 <= i <= self.r:
            raise PreconditionError(f"generator index {i} outside 1..{self.r}")

    def offset(self, i: int) -> int:
        self._check_index(i)
        return sum(s - 1 for s in self.loops[: i - 1])

    def coset_count(self) -> int:
        return 1 + sum(s - 1 for s in self.loops)

    def coset_label(self, i: int, t: int) -> int:
        """Label of g_i^t U (t taken mod s_i)"""
        t %= self.loop_length(i)
        return 1 if t == 0 else 1 + self.offset(i) + t

    def coset_position(self, label: int) -> Tuple[int, int]:
        """(i, t) with label = coset_label(i, t); U is reported as (1, 0)"""
        if not 1 <= label <= self.coset_count():
            raise PreconditionError(f"coset label {label} outside 1..{self.coset_count()}")
        if label == 1:
            return 1, 0
        for i in range(1, self.r + 1):
            t = label - 1 - self.offset(i)
            if 1 <= t < self.loops[i - 1]:
                return i, t
        raise PreconditionError(f"no coset carries label {label}")

    def representative(self, label: int) -> Word:
        i, t = self.coset_position(label)
        return generator(self.r, i) ** t

    def representative_name(self, label: int) -> str:
        i, t = self.coset_position(label)
        if t == 0:
            return "U"
        name = generator_names(self.r)[i - 1]
        return f"{name}U" if t == 1 else f"{name}^{t}U"

    @cached_property
    def _generator_actions(self) -> Tuple[Permutation, ...]:
        n = self.coset_count()
        actions = []
        for i, s in enumerate(self.loops, 1):
            if s == 1:
                actions.append(Permutation.identity(n))
            else:
                actions.append(Permutation.from_cycles([[self.coset_label(i, t) for t in range(s)]], n))
        return tuple(actions)

    def pi_generator(self, i: int) -> Permutation:
        self._check_index(i)
        return self._generator_actions[i - 1]

    def pi_word(self, w: Word) -> Permutation:
        """pi(w): vU -> wvU; pi(uv) = pi(u)∘pi(v)"""
        if w.group.rank != self.r:
            raise PreconditionError(f"word of rank {w.group.rank} used with a rank {self.r} loop subgroup")
        result = Permutation.identity(self.coset_count())
        for index, exponent in syllables(w):
            result = result.compose(self._generator_actions[index - 1].power(exponent))
        return result

    def contains(self, w: Word) -> bool:
        return self.pi_word(w)(1) == 1

    def in_normal_core(self, w: Word) -> bool:
        return self.pi_word(w).is_identity()

    def basis(self) -> List[Word]:
        """g_i^{s_i} for every i, then g_i^-k g_j g_i^k for i != j, 1 <= k < s_i"""
        gens = [generator(self.r, i) for i in range(1, self.r + 1)]
        words = [g ** s for g, s in zip(gens, self.loops)]
        for i, s in enumerate(self.loops, 1):
            for j in range(1, self.r + 1):
                if j == i:
                    continue
                for k in range(1, s):
                    words.append(gens[i - 1] ** -k * gens[j - 1] * gens[i - 1] ** k)
        return words

    def parity_vector(self) -> ParityVector:
        """1 for an even loop length, 0 for an odd one"""
        return tuple(1 - s % 2 for s in self.loops)

    def looplet_count(self) -> int:
        return sum(1 for s in self.loops if s == 1)

    def looplets(self) -> List[int]:
        return [i for i, s in enumerate(self.loops, 1) if s == 1]

    def restrict_to_loops(self, i: int, k: int) -> LoopRestriction:
        if i == k:
            raise PreconditionError(f"restriction needs two distinct loops, got i = k = {i}")
        s_i, s_k = self.loop_length(i), self.loop_length(k)
        if s_i < 2 or s_k < 2:
            raise PreconditionError(f"loops {i} and {k} must both have length > 1, got {s_i} and {s_k}")

        m, n = s_i, s_i + s_k - 1
        relabel = {1: 1}
        for t in range(1, s_i):
            relabel[self.coset_label(i, t)] = t + 1
        for t in range(1, s_k):
            relabel[self.coset_label(k, t)] = s_i + t
        sigma, omega = standard_cycles(m, n)
        return LoopRestriction(m=m, n=n, sigma=sigma, omega=omega, relabel=relabel)

    def loop_reversal(self, j: int) -> Permutation:
        """The coset permutation g_j^t U <-> g_j^(s_j - t) U induced by inverting g_j"""
        s = self.loop_length(j)
        mapping = list(range(1, self.coset_count() + 1))
        for t in range(1, s):
            mapping[self.coset_label(j, t) - 1] = self.coset_label(j, s - t)
        return Permutation.from_mapping(mapping)

    def coset_graph(self) -> nx.MultiDiGraph:
        """Left coset graph: edge vU -> g_i vU labelled by g_i"""
        graph = nx.MultiDiGraph(loops=str(self))
        names = generator_names(self.r)
        for label in range(1, self.coset_count() + 1):
            graph.add_node(label, representative=self.representative_name(label))
        for label in range(1, self.coset_count() + 1):
            for name, action in zip(names, self._generator_actions):
                graph.add_edge(label, action(label), key=name, generator=name)
        return graph

    def coset_graph_dot(self) -> str:
        graph = self.coset_graph()
        lines = [f'digraph "{self}" {{']
        for label in sorted(graph.nodes):
            lines.append(f'  {label} [label="{graph.nodes[label]["representative"]}"];')
        for source, target, name in sorted(graph.edges(keys=True), key=lambda edge: (edge[0], edge[2])):
            lines.append(f'  {source} -> {target} [label="{name}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def parse_coset_dot(text: str) -> nx.MultiDiGraph:
    """Read a coset_graph_dot rendering back into the graph model"""
    graph = nx.MultiDiGraph()
    for line in text.splitlines():
        node = _DOT_NODE.match(line)
        if node:
            graph.add_node(int(node.group(1)), representative=node.group(2))
            continue
        edge = _DOT_EDGE.match(line)
        if edge:
            name = edge.group(3)
            graph.add_edge(int(edge.group(1)), int(edge.group(2)), key=name, generator=name)
    return graph
