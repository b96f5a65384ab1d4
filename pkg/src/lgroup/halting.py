"""Center quotient of the two-generator group driven by machine runs.

A finite list of Turing machines is fixed; position n in the list owns
the n-th odd prime p.  Whenever machine n halts on the empty tape in t
steps, the relation identifying the central basis words with indices p
and p^t switches on.  The quotient by all switched-on relations keeps a
decidable word problem: a word dies there iff its image outside the
center dies and its central f-coordinates sum to zero on every class of
identified indices, and the classes touching indices up to N are found
by running the listed machines for N steps.

The probe at the end reports one-sided evidence: a central basis word is
certainly trivial in a lower-central quotient once its index (or the
index an observed halt identified it with) is deep enough; everything
else is only "not yet", since a longer run could still reveal a halt.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Dict, List, Mapping, Optional, Tuple

from .hall import central_f_coordinates, hall_from_word
from .words import GroupWord

__all__ = [
    "CentralWord",
    "Halted",
    "MachineList",
    "NontrivialUpToBudget",
    "Running",
    "TAPE_SYMBOLS",
    "Trivial",
    "TuringMachine",
    "active_relations",
    "gamma_probe",
    "h_center_wp",
    "h_wp",
    "odd_prime",
    "run_tm",
]

TAPE_SYMBOLS = ("0", "1", "blank")

MOVES = ("L", "R")


@dataclass(frozen=True)
class TuringMachine:
    """Single one-way-infinite-tape machine; rules are (state, read,
    next state, write, move)."""

    n_states: int
    start: int
    halt: int
    rules: Tuple[Tuple[int, str, int, str, str], ...]

    @staticmethod
    def make(
        n_states: int,
        start: int,
        halt: int,
        rules: Tuple[Tuple[int, str, int, str, str], ...],
    ) -> "TuringMachine":
        if n_states < 1:
            raise ValueError("need at least one state")
        for q in (start, halt):
            if not 0 <= q < n_states:
                raise ValueError(f"state {q} out of range")
        seen = {}
        for rule in rules:
            q, sym, q2, sym2, move = rule
            if not (0 <= q < n_states and 0 <= q2 < n_states):
                raise ValueError(f"rule {rule!r} uses a state out of range")
            if q == halt:
                raise ValueError("halt state has an outgoing rule")
            if sym not in TAPE_SYMBOLS or sym2 not in TAPE_SYMBOLS:
                raise ValueError(f"rule {rule!r} uses an unknown tape symbol")
            if move not in MOVES:
                raise ValueError(f"rule {rule!r} has move {move!r}, want L or R")
            if (q, sym) in seen:
                raise ValueError(f"duplicate rule for state {q} reading {sym!r}")
            seen[(q, sym)] = rule
        for q in range(n_states):
            if q == halt:
                continue
            for sym in TAPE_SYMBOLS:
                if (q, sym) not in seen:
                    raise ValueError(
                        f"no rule for state {q} reading {sym!r}; "
                        "transitions must be total away from the halt state"
                    )
        return TuringMachine(n_states, start, halt, tuple(sorted(rules)))


@dataclass(frozen=True)
class Halted:
    steps: int


@dataclass(frozen=True)
class Running:
    pass


def run_tm(m: TuringMachine, budget: int) -> Halted | Running:
    """Run from the empty tape for at most `budget` steps.

    Returns Halted(t) with the exact step count iff the halt state is
    reached within the budget.  Moving left at the tape edge stays put.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    table = {(q, sym): (q2, sym2, move) for q, sym, q2, sym2, move in m.rules}
    tape: Dict[int, str] = {}
    state, pos, t = m.start, 0, 0
    while state != m.halt:
        if t == budget:
            return Running()
        state, write, move = table[(state, tape.get(pos, "blank"))]
        if write == "blank":
            tape.pop(pos, None)
        else:
            tape[pos] = write
        pos = pos + 1 if move == "R" else max(0, pos - 1)
        t += 1
    return Halted(t)


@dataclass(frozen=True)
class MachineList:
    machines: Tuple[TuringMachine, ...]

    @staticmethod
    def make(machines) -> "MachineList":
        return MachineList(tuple(machines))

    def machine(self, idx: int) -> TuringMachine:
        """The idx-th machine, counted from 1 like its prime."""
        if not 1 <= idx <= len(self.machines):
            raise ValueError(f"no machine with index {idx}")
        return self.machines[idx - 1]


def odd_prime(n: int) -> int:
    """The n-th odd prime: 3, 5, 7, 11, ..."""
    if n < 1:
        raise ValueError("index must be positive")
    count, cand = 0, 1
    while count < n:
        cand += 2
        if all(cand % d for d in range(3, isqrt(cand) + 1, 2)):
            count += 1
    return cand


@dataclass(frozen=True)
class CentralWord:
    """Finitely supported exponent vector over the central f-basis."""

    exps: Tuple[Tuple[int, int], ...]

    @staticmethod
    def make(exps: Mapping[int, int]) -> "CentralWord":
        for j in exps:
            if j < 1:
                raise ValueError("f-basis indices are positive")
        return CentralWord(tuple(sorted((j, v) for j, v in exps.items() if v)))


def active_relations(ms: MachineList, horizon: int) -> Tuple[Tuple[int, int], ...]:
    """All switched-on identifications (p, p^t) with both sides <= horizon.

    Running each listed machine for `horizon` steps is enough: a halt
    taking longer than that forces p^t > horizon anyway.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    pairs: List[Tuple[int, int]] = []
    for idx in range(1, len(ms.machines) + 1):
        p = odd_prime(idx)
        if p > horizon:
            break
        res = run_tm(ms.machines[idx - 1], horizon)
        if isinstance(res, Halted) and p ** res.steps <= horizon:
            pairs.append((p, p ** res.steps))
    return tuple(pairs)


def h_center_wp(
    w: CentralWord, ms: MachineList, *, horizon: Optional[int] = None
) -> bool:
    """Is the central word trivial in the machine-driven quotient?

    Identified indices pool their exponents, so the word dies iff the
    pool vanishes on every class.  The default horizon is the largest
    supported index: relations reaching above it only ever pull
    zero-exponent indices into a class, which cannot change any sum.
    """
    if not w.exps:
        return True
    top = max(j for j, _ in w.exps)
    if horizon is None:
        horizon = top
    elif horizon < top:
        raise ValueError("horizon below the word support")
    parent = list(range(horizon + 1))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for p, q in active_relations(ms, horizon):
        parent[find(p)] = find(q)
    sums: Dict[int, int] = {}
    for j, v in w.exps:
        root = find(j)
        sums[root] = sums.get(root, 0) + v
    return all(v == 0 for v in sums.values())


def h_wp(w: GroupWord, ms: MachineList) -> bool:
    """Word problem for the machine-driven quotient, words over a, b.

    Nothing outside the center is ever identified, so a word with a
    surviving wreath image is nontrivial outright; central words reduce
    to the exponent pooling above.
    """
    x = hall_from_word(w)
    if x.shift != 0 or x.lamps:
        return False
    coords = central_f_coordinates(x)
    return h_center_wp(
        CentralWord.make({k: v for k, v in enumerate(coords, start=1)}), ms
    )


@dataclass(frozen=True)
class Trivial:
    pass


@dataclass(frozen=True)
class NontrivialUpToBudget:
    pass


def gamma_probe(
    idx: int, gamma_index: int, ms: MachineList, budget: int
) -> Trivial | NontrivialUpToBudget:
    """Is the idx-th central marker trivial in the gamma_index quotient?

    Trivial is definitive: the marker's own weight buries it once
    gamma_index < p + 3, and an observed halt in t steps rebases it to
    weight p^t + 2.  The other answer is only as good as the budget; a
    longer run may still surface a halt.
    """
    if gamma_index < 1:
        raise ValueError("series index must be positive")
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    m = ms.machine(idx)
    p = odd_prime(idx)
    if gamma_index < p + 3:
        return Trivial()
    res = run_tm(m, budget)
    if isinstance(res, Halted) and gamma_index < p ** res.steps + 3:
        return Trivial()
    return NontrivialUpToBudget()
