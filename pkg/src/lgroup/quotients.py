"""Quotient tests for groups presented by word systems.

A presentation whose relators form the language of a word system has
infinitely many relators, but deciding whether the group surjects onto
a nilpotent or finite target only ever consults finitely much of the
language.  For a nilpotent target the relator orbit stabilizes inside
the class-c quotient after finitely many substitution rounds; for a
finite target the generator assignments reachable by precomposing with
the substitutions form a finite orbit.  Both searches are implemented
here, on top of the pc-presentation engine in `nilpotent`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

from .lsystems import Edt0lSystem, Hdt0lSystem, edt0l_to_hdt0l
from .nilpotent import (
    BudgetExceeded,
    PcPresentation,
    marked_quotient_nilpotent,
    nilpotent_quotient,
    pc_wp,
)
from .presentations import MarkedPresentation
from .words import (
    MonoidWord,
    base_letter,
    free_reduce,
    group_to_monoid,
    inverse_letter,
    invert,
    is_inverse_letter,
    monoid_to_group,
)

__all__ = [
    "FiniteGroup",
    "FiniteTarget",
    "NilpotentClass",
    "StabilizedQuotient",
    "edt0l_nilpotent_quotient",
    "finite_quotient_test",
    "marked_quotient_edt0l_nilpotent",
    "stabilize_nonterminals",
]


# --------------------------------------------------------------------------
# target descriptions


@dataclass(frozen=True)
class NilpotentClass:
    """Residual family: all nilpotent groups of class at most `cls`."""

    cls: int

    def __post_init__(self) -> None:
        if not isinstance(self.cls, int) or self.cls < 1:
            raise ValueError("nilpotency class must be a positive integer")


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group as a multiplication table over indices 0..order-1.

    `table[x][y]` is the product x*y, `identity` the neutral element,
    `inverses[x]` the inverse of x.  Use `make` or `from_permutations`;
    both validate the group axioms in full.
    """

    order: int
    table: Tuple[Tuple[int, ...], ...]
    identity: int
    inverses: Tuple[int, ...]

    @staticmethod
    def make(table: Sequence[Sequence[int]]) -> "FiniteGroup":
        rows = tuple(tuple(row) for row in table)
        n = len(rows)
        if n == 0:
            raise ValueError("multiplication table is empty")
        for row in rows:
            if len(row) != n:
                raise ValueError("multiplication table is not square")
            for x in row:
                if not isinstance(x, int) or not 0 <= x < n:
                    raise ValueError("table entry out of range")
        identity = None
        for e in range(n):
            if all(rows[e][x] == x and rows[x][e] == x for x in range(n)):
                identity = e
                break
        if identity is None:
            raise ValueError("multiplication table has no identity element")
        inverses = []
        for x in range(n):
            two_sided = [
                y
                for y in range(n)
                if rows[x][y] == identity and rows[y][x] == identity
            ]
            if len(two_sided) != 1:
                raise ValueError(f"element {x} has no two-sided inverse")
            inverses.append(two_sided[0])
        # Targets are small by design, so the cubic check is affordable.
        for x in range(n):
            for y in range(n):
                xy = rows[x][y]
                for z in range(n):
                    if rows[xy][z] != rows[x][rows[y][z]]:
                        raise ValueError("multiplication table is not associative")
        return FiniteGroup(n, rows, identity, tuple(inverses))

    @staticmethod
    def from_permutations(
        degree: int, perms: Sequence[Sequence[int]]
    ) -> "FiniteGroup":
        """Closure of the given permutations of {0..degree-1} under composition.

        Element 0 of the result is the identity permutation; the rest are
        indexed in breadth-first discovery order.
        """
        if degree < 1:
            raise ValueError("permutation degree must be positive")
        gens = []
        for p in perms:
            q = tuple(p)
            if sorted(q) != list(range(degree)):
                raise ValueError(f"not a permutation of 0..{degree - 1}: {p!r}")
            gens.append(q)
        ident = tuple(range(degree))
        index: Dict[Tuple[int, ...], int] = {ident: 0}
        elements = [ident]
        queue = deque([ident])
        while queue:
            p = queue.popleft()
            for g in gens:
                # act left to right: first p, then g
                q = tuple(g[p[i]] for i in range(degree))
                if q not in index:
                    index[q] = len(elements)
                    elements.append(q)
                    queue.append(q)
        n = len(elements)
        rows = []
        for p in elements:
            row = []
            for q in elements:
                prod = tuple(q[p[i]] for i in range(degree))
                row.append(index[prod])
            rows.append(tuple(row))
        return FiniteGroup.make(rows)

    def mul(self, x: int, y: int) -> int:
        return self.table[x][y]

    def inv(self, x: int) -> int:
        return self.inverses[x]


@dataclass(frozen=True)
class FiniteTarget:
    """Residual family: one finite group with a fixed generator assignment."""

    group: FiniteGroup
    assignment: Tuple[Tuple[str, int], ...]

    @staticmethod
    def make(group: FiniteGroup, assignment: Mapping[str, int]) -> "FiniteTarget":
        pairs = []
        for name, val in assignment.items():
            if not isinstance(val, int) or not 0 <= val < group.order:
                raise ValueError(f"assignment for {name!r} is out of range")
            pairs.append((name, val))
        return FiniteTarget(group, tuple(sorted(pairs)))


# --------------------------------------------------------------------------
# nonterminal stabilization in a nilpotent quotient


def _word_system(p: MarkedPresentation) -> Hdt0lSystem:
    src = p.source
    if isinstance(src, Edt0lSystem):
        return edt0l_to_hdt0l(src)
    if isinstance(src, Hdt0lSystem):
        return src
    raise ValueError("presentation source is not a word system")


def _check_group_encoding(sys: Hdt0lSystem) -> None:
    # Stabilization reasons about the group generated by the positive
    # letters, so the system must encode group endomorphisms: the inner
    # alphabet is inverse closed and every table entry maps a formal
    # inverse to the reversed inverse of the positive image.
    alpha = set(sys.inner)
    for x in sys.inner:
        partner = base_letter(x) if is_inverse_letter(x) else inverse_letter(x)
        if partner not in alpha:
            raise ValueError(f"inner alphabet is not inverse closed at {x!r}")
    for name, m in sys.morphisms:
        for x in sys.inner:
            if is_inverse_letter(x):
                continue
            got = tuple(m((inverse_letter(x),)))
            want = group_to_monoid(invert(monoid_to_group(m((x,)))))
            if got != want:
                raise ValueError(
                    f"substitution {name!r} does not respect inverses at {x!r}"
                )


def _next_level(sys: Hdt0lSystem, level: Sequence[MonoidWord]) -> List[MonoidWord]:
    nxt: Dict[MonoidWord, None] = {}
    for w in level:
        for _, m in sys.morphisms:
            nxt[m(w)] = None
    return list(nxt)


def _positive_letters(w) -> List[str]:
    out: Dict[str, None] = {}
    for x in w:
        out[base_letter(x) if is_inverse_letter(x) else x] = None
    return list(out)


class _OrbitQuotient:
    """Class-c quotients of the group cut out by a set of relator words.

    The ambient free group is huge (one generator per positive inner
    letter), but each relator only ties together the letters it uses, so
    the group splits as a free product over the connected components of
    the letters-share-a-relator graph.  A word is trivial iff it is
    trivial in the factor spanned by its own letters, which keeps every
    pc computation down to the handful of letters that actually interact.
    """

    def __init__(self, order: Sequence[str], cls: int, budget: int, max_tails: int):
        self.rank = {x: k for k, x in enumerate(order)}
        self.cls = cls
        self.budget = budget
        self.max_tails = max_tails
        self.relators: List[Tuple[str, ...]] = []
        self.parent: Dict[str, str] = {}
        self.cache: Dict[Tuple, object] = {}

    def _find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def add_relator(self, w: MonoidWord) -> None:
        g = free_reduce(monoid_to_group(w))
        if not g:
            return
        self.relators.append(g)
        self.cache.clear()
        letters = _positive_letters(name for name, _ in g)
        for x in letters:
            self.parent.setdefault(x, x)
        head = self._find(letters[0])
        for x in letters[1:]:
            self.parent[self._find(x)] = head

    def is_trivial(self, w: MonoidWord) -> bool:
        g = free_reduce(monoid_to_group(w))
        if not g:
            return True
        own = _positive_letters(name for name, _ in g)
        touched = {self._find(x) for x in own if x in self.parent}
        gens = set(own)
        rels = []
        for r in self.relators:
            letters = _positive_letters(name for name, _ in r)
            if self._find(letters[0]) in touched:
                rels.append(r)
                gens.update(letters)
        gens = sorted(gens, key=self.rank.__getitem__)
        key = (tuple(gens), len(rels))
        pc = self.cache.get(key)
        if pc is None:
            pc = nilpotent_quotient(
                gens,
                rels,
                self.cls,
                collection_budget=self.budget,
                max_tails=self.max_tails,
            )
            self.cache[key] = pc
        return pc_wp(pc, g)


def _stabilize(
    sys: Hdt0lSystem,
    cls: int,
    max_n: int,
    verify_extra: bool,
    budget: int,
    max_tails: int,
) -> Tuple[int, List[MonoidWord]]:
    _check_group_encoding(sys)
    order = tuple(x for x in sys.inner if not is_inverse_letter(x))
    oq = _OrbitQuotient(order, cls, budget, max_tails)
    union: List[MonoidWord] = []
    seen: Dict[MonoidWord, None] = {}
    level = list(dict.fromkeys(sys.seeds_list()))
    for n in range(max_n + 1):
        for w in level:
            if w not in seen:
                seen[w] = None
                union.append(w)
                oq.add_relator(w)
        nxt = _next_level(sys, level)
        if all(oq.is_trivial(w) for w in nxt):
            if verify_extra:
                # One more substitution round must stay trivial: it lies in
                # the normal closure already tested, so a failure here means
                # the quotient engine is wrong.
                for w in _next_level(sys, nxt):
                    if not oq.is_trivial(w):
                        raise RuntimeError(
                            "stabilized orbit escaped one round later; "
                            "quotient engine is inconsistent"
                        )
            return n, union
        level = nxt
    raise BudgetExceeded(
        f"relator orbit not stable within {max_n} substitution rounds"
    )


def stabilize_nonterminals(
    sys: Hdt0lSystem,
    res: NilpotentClass,
    max_n: int,
    *,
    verify_extra: bool = True,
    collection_budget: int = 10_000_000,
    max_tails: int = 4096,
) -> int:
    """Least n with the whole seed orbit trivial in the class-c quotient
    of the group presented by the orbit's first n levels.

    The system's tables must encode group endomorphisms over the inner
    alphabet (inverse-closed, inverse-respecting); raises ValueError
    otherwise, and BudgetExceeded when no n <= max_n works.
    """
    if not isinstance(res, NilpotentClass):
        raise ValueError("stabilization needs a NilpotentClass target")
    if max_n < 0:
        raise ValueError("max_n must be nonnegative")
    n, _ = _stabilize(sys, res.cls, max_n, verify_extra, collection_budget, max_tails)
    return n


# --------------------------------------------------------------------------
# nilpotent quotients of word-system presentations


@dataclass(frozen=True)
class StabilizedQuotient:
    """Class-c quotient of a word-system presentation.

    `pc` is the quotient itself, `presentation` the finite marked
    presentation (the stabilized relators pushed to the outer
    generators) that defines it, and `depth` the number of substitution
    rounds that sufficed.
    """

    pc: PcPresentation
    presentation: MarkedPresentation
    depth: int


def edt0l_nilpotent_quotient(
    p: MarkedPresentation,
    cls: int,
    *,
    max_depth: int = 32,
    collection_budget: int = 10_000_000,
    max_tails: int = 4096,
) -> StabilizedQuotient:
    """Nilpotent class-`cls` quotient of a word-system presentation.

    Stabilizes the relator orbit over the inner alphabet, pushes the
    stabilized finite set through the output map, and builds the pc
    presentation of the resulting finitely presented group.
    """
    hsys = _word_system(p)
    n, union = _stabilize(hsys, cls, max_depth, True, collection_budget, max_tails)
    pushed: List[Tuple[str, ...]] = []
    seen: Dict[Tuple[str, ...], None] = {}
    for w in union:
        g = free_reduce(monoid_to_group(hsys.final(w)))
        if g and g not in seen:
            seen[g] = None
            pushed.append(g)
    pres = MarkedPresentation.finite(p.generators, pushed)
    pc = nilpotent_quotient(
        p.generators,
        pushed,
        cls,
        collection_budget=collection_budget,
        max_tails=max_tails,
    )
    return StabilizedQuotient(pc, pres, n)


def marked_quotient_edt0l_nilpotent(
    src: MarkedPresentation,
    tgt: MarkedPresentation,
    cls: int,
    *,
    max_depth: int = 32,
) -> bool:
    """Does the marked generator bijection src -> tgt induce a surjection
    of class-`cls` quotients?  `src` may be word-system presented; `tgt`
    must have finitely many relators."""
    sq = edt0l_nilpotent_quotient(src, cls, max_depth=max_depth)
    return marked_quotient_nilpotent(sq.presentation, tgt, cls)


# --------------------------------------------------------------------------
# finite quotients by orbit closure


def finite_quotient_test(
    p: MarkedPresentation,
    group: FiniteGroup,
    f_map: Mapping[str, int],
) -> bool:
    """Does sending the marked generators into `group` via `f_map` kill
    every relator of the word-system presentation `p`?

    Works on the finite orbit of generator assignments over the inner
    alphabet under precomposition with the substitution tables; the
    orbit has at most |group| ** |inner alphabet| members, so this
    always terminates.
    """
    hsys = _word_system(p)
    for s in p.generators:
        if s not in f_map:
            raise ValueError(f"assignment missing generator {s!r}")
    for s, val in f_map.items():
        if s not in p.generators:
            raise ValueError(f"assignment names unknown generator {s!r}")
        if not isinstance(val, int) or not 0 <= val < group.order:
            raise ValueError(f"assignment for {s!r} is out of range")

    def outer_value(x: str) -> int:
        if is_inverse_letter(x):
            return group.inv(f_map[base_letter(x)])
        return f_map[x]

    inner = hsys.inner
    pos = {x: k for k, x in enumerate(inner)}

    def evaluate(assign: Tuple[int, ...], w: MonoidWord) -> int:
        acc = group.identity
        for x in w:
            acc = group.table[acc][assign[pos[x]]]
        return acc

    start = []
    for y in inner:
        acc = group.identity
        for x in hsys.final((y,)):
            acc = group.table[acc][outer_value(x)]
        start.append(acc)
    base = tuple(start)

    tables = [m for _, m in hsys.morphisms]
    images = [[m((y,)) for y in inner] for m in tables]
    sys_seeds = hsys.seeds_list()
    seen = {base}
    queue = deque([base])
    while queue:
        h = queue.popleft()
        for w in sys_seeds:
            if evaluate(h, w) != group.identity:
                return False
        for img in images:
            nh = tuple(evaluate(h, img[k]) for k in range(len(inner)))
            if nh not in seen:
                seen.add(nh)
                queue.append(nh)
    return True
