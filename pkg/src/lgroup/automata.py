"""Deterministic finite automata over symbol alphabets.

States are dense integers 0..n-1 and the transition map is total on the
declared alphabet.  Besides the usual run/product operations this module
builds the letter-tracking automaton of a rewriting system: a DFA over the
system's morphism names whose runs record which letters can occur after
applying a given composition to the seed.  It accepts exactly the
compositions that map the seed into the terminal submonoid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Tuple

from .words import MonoidWord, check_alphabet

__all__ = [
    "Dfa",
    "ControlLanguage",
    "accepts",
    "product",
    "letter_tracking_dfa",
]


@dataclass(frozen=True)
class Dfa:
    alphabet: Tuple[str, ...]
    n_states: int
    initial: int
    accepting: FrozenSet[int]
    transitions: Tuple[Tuple[int, str, int], ...]

    @staticmethod
    def make(alphabet, n_states, initial, accepting, transitions) -> "Dfa":
        alphabet = check_alphabet(alphabet)
        if n_states < 1:
            raise ValueError("automaton needs at least one state")
        if not 0 <= initial < n_states:
            raise ValueError(f"initial state {initial} out of range")
        accepting = frozenset(accepting)
        for q in accepting:
            if not 0 <= q < n_states:
                raise ValueError(f"accepting state {q} out of range")
        table: Dict[Tuple[int, str], int] = {}
        for q, sym, r in transitions:
            if not 0 <= q < n_states or not 0 <= r < n_states:
                raise ValueError(f"transition ({q},{sym!r},{r}) out of range")
            if sym not in alphabet:
                raise ValueError(f"transition symbol {sym!r} not in alphabet")
            key = (q, sym)
            if key in table and table[key] != r:
                raise ValueError(f"conflicting transitions from ({q},{sym!r})")
            table[key] = r
        for q in range(n_states):
            for sym in alphabet:
                if (q, sym) not in table:
                    raise ValueError(f"missing transition from ({q},{sym!r})")
        rows = tuple(sorted((q, sym, r) for (q, sym), r in table.items()))
        return Dfa(alphabet, n_states, initial, accepting, rows)

    @property
    def table(self) -> Dict[Tuple[int, str], int]:
        cached = self.__dict__.get("_table")
        if cached is None:
            cached = {(q, sym): r for q, sym, r in self.transitions}
            object.__setattr__(self, "_table", cached)
        return cached

    def step(self, state: int, sym: str) -> int:
        try:
            return self.table[(state, sym)]
        except KeyError:
            raise ValueError(f"letter {sym!r} outside automaton alphabet") from None

    def run(self, word: MonoidWord) -> int:
        state = self.initial
        for sym in word:
            state = self.step(state, sym)
        return state


def accepts(d: Dfa, word: MonoidWord) -> bool:
    """True iff the run of `word` from the initial state ends accepting."""
    return d.run(word) in d.accepting


def product(d1: Dfa, d2: Dfa) -> Dfa:
    """Intersection automaton, restricted to the reachable pair states."""
    if set(d1.alphabet) != set(d2.alphabet):
        raise ValueError("alphabet mismatch in automaton product")
    alphabet = d1.alphabet
    start = (d1.initial, d2.initial)
    index: Dict[Tuple[int, int], int] = {start: 0}
    order: List[Tuple[int, int]] = [start]
    rows: List[Tuple[int, str, int]] = []
    head = 0
    while head < len(order):
        q1, q2 = order[head]
        for sym in alphabet:
            nxt = (d1.step(q1, sym), d2.step(q2, sym))
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            rows.append((head, sym, index[nxt]))
        head += 1
    accepting = frozenset(
        i for (q1, q2), i in index.items()
        if q1 in d1.accepting and q2 in d2.accepting
    )
    return Dfa.make(alphabet, len(order), 0, accepting, rows)


@dataclass(frozen=True)
class ControlLanguage:
    """A DFA whose alphabet symbols name the morphisms of a companion system."""

    dfa: Dfa

    @property
    def alphabet(self) -> Tuple[str, ...]:
        return self.dfa.alphabet

    def accepts(self, control_word: MonoidWord) -> bool:
        return accepts(self.dfa, control_word)


def letter_tracking_dfa(sys) -> ControlLanguage:
    """Automaton over morphism names that tracks reachable letter sets.

    A state is the set of letters that can appear after applying a given
    composition to the seed; reading morphism name m sends a letter set M to
    the letters occurring in the images of M under m.  Only subsets reachable
    from the seed's letter set are materialized.  Accepting states are the
    subsets of the terminal alphabet, so an accepted control word is exactly
    a composition (first name applied first) taking the seed into a word
    over the terminals.
    """
    terminals = set(sys.terminals)
    names = [name for name, _ in sys.morphisms]
    start = frozenset(sys.seed)
    index: Dict[FrozenSet[str], int] = {start: 0}
    order: List[FrozenSet[str]] = [start]
    rows: List[Tuple[int, str, int]] = []
    head = 0
    while head < len(order):
        subset = order[head]
        for name, morphism in sys.morphisms:
            image = frozenset(
                letter for x in subset for letter in morphism.image_map[x]
            )
            if image not in index:
                index[image] = len(order)
                order.append(image)
            rows.append((head, name, index[image]))
        head += 1
    accepting = frozenset(i for s, i in index.items() if s <= terminals)
    return ControlLanguage(Dfa.make(tuple(names), len(order), 0, accepting, rows))
