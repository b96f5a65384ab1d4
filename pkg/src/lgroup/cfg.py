"""Context-free grammars: normal form, parsing, and relator shrinking.

The group-theoretic use case drives the API: a grammar over a symmetrized
generating alphabet describes a set of relators, and `cf_shrink_step` is
one step of the argument that such a set can be traded for relators of
bounded length.  The step splits a long relator r = uvwxy at a repeated
nonterminal of a longest derivation-tree path and returns the shorter
relator uwy together with the bounded side relator (vwx)w^-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .words import (
    GroupWord,
    MonoidWord,
    check_alphabet,
    free_reduce,
    fresh_symbol,
    invert,
    monoid_to_group,
)

__all__ = [
    "Cfg",
    "PumpingDecomposition",
    "to_cnf",
    "cfg_contains",
    "pumping_constant",
    "pumping_decompose",
    "cf_shrink_step",
]

Rule = Tuple[str, MonoidWord]


@dataclass(frozen=True)
class Cfg:
    terminals: Tuple[str, ...]
    nonterminals: Tuple[str, ...]
    start: str
    rules: Tuple[Rule, ...]

    @staticmethod
    def make(terminals, nonterminals, start, rules) -> "Cfg":
        terminals = check_alphabet(terminals)
        nonterminals = check_alphabet(nonterminals)
        overlap = set(terminals) & set(nonterminals)
        if overlap:
            raise ValueError(f"terminals and nonterminals overlap: {sorted(overlap)}")
        if start not in nonterminals:
            raise ValueError(f"start symbol {start!r} is not a nonterminal")
        alphabet = set(terminals) | set(nonterminals)
        seen = set()
        clean: List[Rule] = []
        for lhs, rhs in rules:
            if lhs not in nonterminals:
                raise ValueError(f"rule head {lhs!r} is not a nonterminal")
            rhs = tuple(rhs)
            for x in rhs:
                if x not in alphabet:
                    raise ValueError(f"rule symbol {x!r} undeclared")
            if (lhs, rhs) not in seen:
                seen.add((lhs, rhs))
                clean.append((lhs, rhs))
        return Cfg(terminals, nonterminals, start, tuple(clean))

    def is_cnf(self) -> bool:
        nts = set(self.nonterminals)
        for _, rhs in self.rules:
            if len(rhs) == 1 and rhs[0] in self.terminals:
                continue
            if len(rhs) == 2 and rhs[0] in nts and rhs[1] in nts:
                continue
            return False
        return True


@dataclass(frozen=True)
class PumpingDecomposition:
    u: MonoidWord
    v: MonoidWord
    w: MonoidWord
    x: MonoidWord
    y: MonoidWord

    @property
    def word(self) -> MonoidWord:
        return self.u + self.v + self.w + self.x + self.y

    def pumped(self, n: int) -> MonoidWord:
        return self.u + self.v * n + self.w + self.x * n + self.y


def _nullable_set(g: Cfg) -> Set[str]:
    nullable: Set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.rules:
            if lhs not in nullable and all(x in nullable for x in rhs):
                nullable.add(lhs)
                changed = True
    return nullable


def to_cnf(g: Cfg) -> Cfg:
    """Chomsky normal form; language preserved on nonempty words."""
    used = list(g.terminals) + list(g.nonterminals)
    start = fresh_symbol("S0", used)
    used.append(start)
    nts: List[str] = [start] + list(g.nonterminals)
    rules: List[Rule] = [(start, (g.start,))] + list(g.rules)

    # terminals inside long right-hand sides get wrapper nonterminals
    wrapper: Dict[str, str] = {}

    def wrap(a: str) -> str:
        if a not in wrapper:
            name = fresh_symbol(f"T_{a}", used)
            used.append(name)
            nts.append(name)
            wrapper[a] = name
        return wrapper[a]

    termed: List[Rule] = []
    for lhs, rhs in rules:
        if len(rhs) >= 2:
            rhs = tuple(wrap(x) if x in g.terminals else x for x in rhs)
        termed.append((lhs, rhs))
    for a, name in wrapper.items():
        termed.append((name, (a,)))

    # binarize
    binned: List[Rule] = []
    counter = 0
    for lhs, rhs in termed:
        while len(rhs) > 2:
            name = fresh_symbol(f"B{counter}", used)
            counter += 1
            used.append(name)
            nts.append(name)
            binned.append((lhs, (rhs[0], name)))
            lhs, rhs = name, rhs[1:]
        binned.append((lhs, rhs))

    # remove erasing rules: add variants with nullable symbols dropped
    nullable = _nullable_set(Cfg.make(g.terminals, tuple(nts), start, binned))
    no_eps: Set[Rule] = set()
    for lhs, rhs in binned:
        options = [()]
        for x in rhs:
            with_x = [opt + (x,) for opt in options]
            if x in nullable:
                options = with_x + options
            else:
                options = with_x
        for opt in options:
            if opt:
                no_eps.add((lhs, opt))

    # resolve unit chains
    nts_set = set(nts)
    unit_reach: Dict[str, Set[str]] = {a: {a} for a in nts}
    changed = True
    while changed:
        changed = False
        for lhs, rhs in no_eps:
            if len(rhs) == 1 and rhs[0] in nts_set:
                for a in nts:
                    if lhs in unit_reach[a] and rhs[0] not in unit_reach[a]:
                        unit_reach[a].add(rhs[0])
                        changed = True
    final: Set[Rule] = set()
    for a in nts:
        for lhs, rhs in no_eps:
            if lhs in unit_reach[a] and not (len(rhs) == 1 and rhs[0] in nts_set):
                final.add((a, rhs))

    # keep only generating, reachable nonterminals
    generating: Set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in final:
            if lhs not in generating and all(
                x in g.terminals or x in generating for x in rhs
            ):
                generating.add(lhs)
                changed = True
    reachable = {start}
    changed = True
    while changed:
        changed = False
        for lhs, rhs in final:
            if lhs in reachable and all(
                x in g.terminals or x in generating for x in rhs
            ):
                for x in rhs:
                    if x in nts_set and x not in reachable:
                        reachable.add(x)
                        changed = True
    keep = generating & reachable
    keep.add(start)
    kept_rules = tuple(
        sorted(
            (lhs, rhs)
            for lhs, rhs in final
            if lhs in keep
            and all(x in g.terminals or x in keep for x in rhs)
        )
    )
    kept_nts = tuple(a for a in nts if a in keep)
    return Cfg.make(g.terminals, kept_nts, start, kept_rules)


Back = Tuple  # ("leaf", a) | ("split", k, B, C)


def _cyk(g: Cfg, w: MonoidWord) -> Optional[List[List[Dict[str, Back]]]]:
    """CYK table for a CNF grammar; table[i][l][A] derives w[i:i+l]."""
    n = len(w)
    if n == 0:
        return None
    by_terminal: Dict[str, List[str]] = {}
    pairs: List[Tuple[str, str, str]] = []
    for lhs, rhs in g.rules:
        if len(rhs) == 1:
            by_terminal.setdefault(rhs[0], []).append(lhs)
        else:
            pairs.append((lhs, rhs[0], rhs[1]))
    table: List[List[Dict[str, Back]]] = [
        [dict() for _ in range(n + 1)] for _ in range(n)
    ]
    for i, a in enumerate(w):
        for lhs in by_terminal.get(a, ()):
            table[i][1][lhs] = ("leaf", a)
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            cell = table[i][span]
            for k in range(1, span):
                left = table[i][k]
                right = table[i + k][span - k]
                if not left or not right:
                    continue
                for lhs, b, c in pairs:
                    if lhs not in cell and b in left and c in right:
                        cell[lhs] = ("split", k, b, c)
    return table


def cfg_contains(g: Cfg, w: Sequence[str]) -> bool:
    """True iff the grammar derives w.  The empty word is checked on g itself."""
    w = tuple(w)
    for a in w:
        if a not in g.terminals:
            raise ValueError(f"word letter {a!r} is not a grammar terminal")
    if not w:
        return g.start in _nullable_set(g)
    cnf = g if g.is_cnf() else to_cnf(g)
    table = _cyk(cnf, w)
    return cnf.start in table[0][len(w)]


def pumping_constant(g: Cfg) -> int:
    """2 to the number of normal-form nonterminals.

    Every derivation tree of a word at least this long has a root-to-leaf
    path repeating a nonterminal within its lowest segment, which is what
    `pumping_decompose` exploits.
    """
    cnf = g if g.is_cnf() else to_cnf(g)
    return 2 ** len(cnf.nonterminals)


def _longest_path(table, i: int, span: int, sym: str) -> List[Tuple[int, int, str]]:
    """Longest root-to-leaf nonterminal path in the derivation tree at sym."""
    back = table[i][span][sym]
    if back[0] == "leaf":
        return [(i, span, sym)]
    _, k, b, c = back
    left = _longest_path(table, i, k, b)
    right = _longest_path(table, i + k, span - k, c)
    tail = left if len(left) >= len(right) else right
    return [(i, span, sym)] + tail


def pumping_decompose(g: Cfg, r: Sequence[str]) -> PumpingDecomposition:
    """Split r = uvwxy at a repeated nonterminal on a longest tree path.

    Guarantees |vx| >= 1, |vwx| <= pumping_constant(g), and that uwy and
    u v^2 w x^2 y still parse.
    """
    r = tuple(r)
    cnf = g if g.is_cnf() else to_cnf(g)
    p = 2 ** len(cnf.nonterminals)
    if len(r) < p:
        raise ValueError(f"word of length {len(r)} is below the pumping constant {p}")
    table = _cyk(cnf, r)
    if cnf.start not in table[0][len(r)]:
        raise ValueError("word is not in the grammar's language")
    path = _longest_path(table, 0, len(r), cnf.start)
    # among the lowest m+1 path nodes two share a nonterminal; take the
    # repetition whose upper node sits lowest, so its subtree stays small
    m = len(cnf.nonterminals)
    lowest = path[-(m + 1) :]
    seen: Dict[str, int] = {}
    upper = lower = None
    for idx in range(len(lowest) - 1, -1, -1):
        sym = lowest[idx][2]
        if sym in seen:
            upper, lower = lowest[idx], lowest[seen[sym]]
            break
        seen[sym] = idx
    if upper is None:
        raise AssertionError("no repeated nonterminal on a long path")
    ui, uspan, _ = upper
    li, lspan, _ = lower
    u = r[:ui]
    v = r[ui:li]
    w = r[li : li + lspan]
    x = r[li + lspan : ui + uspan]
    y = r[ui + uspan :]
    dec = PumpingDecomposition(u, v, w, x, y)
    assert dec.word == r
    assert len(v) + len(x) >= 1
    assert len(v) + len(w) + len(x) <= p
    assert cfg_contains(cnf, dec.pumped(0))
    assert cfg_contains(cnf, dec.pumped(2))
    return dec


def cf_shrink_step(g: Cfg, r: Sequence[str]) -> Tuple[MonoidWord, GroupWord]:
    """One shrink step on a long relator from a relator grammar.

    Returns (shorter, side) with shorter = uwy, a strictly shorter language
    word, and side = (vwx)w^-1 as a reduced group word of length at most
    twice the pumping constant.  Together they imply the original relator
    in any group where all language words are relators.
    """
    dec = pumping_decompose(g, r)
    shorter = dec.pumped(0)
    vwx = dec.v + dec.w + dec.x
    side = free_reduce(
        monoid_to_group(vwx) + invert(monoid_to_group(dec.w))
    )
    assert len(shorter) < len(r)
    assert len(side) <= 2 * pumping_constant(g)
    return shorter, side
