"""Ready-made example systems, presentations, and finite groups.

These are the worked examples shared by the test suite, the command
line, and the documentation.  Each constructor returns a fresh value
built through the ordinary public constructors, so they double as
usage demonstrations.
"""

from __future__ import annotations

from .cfg import Cfg
from .halting import MachineList, TuringMachine
from .lsystems import Edt0lSystem, group_substitution
from .presentations import MarkedPresentation
from .quotients import FiniteGroup
from .words import MonoidMorphism, commutator, inverse_closure, parse_group_word

__all__ = [
    "anbn_cfg",
    "counting_edt0l",
    "cyclic_group",
    "empty_language_edt0l",
    "four_step_halter",
    "halting_machines",
    "lamplighter_edt0l",
]


def lamplighter_edt0l() -> MarkedPresentation:
    """Two-generator wreath-type presentation with an EDT0L relator language.

    Generators a (shift) and eps (order-2 lamp); the relator language is
    {eps eps} together with the commutators of eps against each of its
    shift conjugates, produced as the orbit of the nonterminal N: one
    substitution turns N into the square, another into a commutator with
    a second nonterminal E that a pair of substitutions conjugates left
    or right, and an emitting substitution turns E into the lamp.
    """
    positive = ("a", "eps", "N", "E")

    def w(text):
        return parse_group_word(text, alphabet=positive)

    morphisms = (
        ("init_sq", group_substitution(positive, {"N": w("eps eps")})),
        ("init_comm", group_substitution(positive, {"N": commutator(w("eps"), w("E"))})),
        ("shift_r", group_substitution(positive, {"E": w("a^-1 E a")})),
        ("shift_l", group_substitution(positive, {"E": w("a E a^-1")})),
        ("emit", group_substitution(positive, {"E": w("eps")})),
    )
    sys = Edt0lSystem.make(
        inverse_closure(("a", "eps")),
        inverse_closure(("N", "E")),
        ("N",),
        morphisms,
    )
    return MarkedPresentation.make(("a", "eps"), sys)


def empty_language_edt0l() -> MarkedPresentation:
    """Rank-2 free group presented with an empty relator language.

    The single substitution fixes the seed nonterminal, so no orbit word
    ever becomes terminal and the language is empty.
    """
    positive = ("a", "b", "N")
    morphisms = (("same", group_substitution(positive, {})),)
    sys = Edt0lSystem.make(
        inverse_closure(("a", "b")),
        inverse_closure(("N",)),
        ("N",),
        morphisms,
    )
    return MarkedPresentation.make(("a", "b"), sys)


def cyclic_group(n: int) -> FiniteGroup:
    """The integers mod n as an explicit multiplication table."""
    if n < 1:
        raise ValueError("cyclic group order must be positive")
    return FiniteGroup.make([[(i + j) % n for j in range(n)] for i in range(n)])


def halting_machines() -> MachineList:
    """Two machines: the first halts after two steps, the second loops.

    The halter writes a mark, steps right, writes a second mark while
    entering its halt state.  Rules for reading 0 or 1 are unreachable
    from the empty tape but keep the transition total.
    """
    halter = TuringMachine.make(
        3,
        0,
        2,
        (
            (0, "blank", 1, "1", "R"),
            (0, "0", 0, "0", "R"),
            (0, "1", 0, "1", "R"),
            (1, "blank", 2, "1", "L"),
            (1, "0", 1, "0", "R"),
            (1, "1", 1, "1", "R"),
        ),
    )
    looper = TuringMachine.make(
        2,
        0,
        1,
        (
            (0, "blank", 0, "blank", "R"),
            (0, "0", 0, "0", "R"),
            (0, "1", 0, "1", "R"),
        ),
    )
    return MachineList.make((halter, looper))


def four_step_halter() -> TuringMachine:
    """Writes four marks left to right, then stops: Halted(4) when run."""
    rules = []
    for q in range(4):
        rules.append((q, "blank", q + 1, "1", "R"))
        rules.append((q, "0", q, "0", "R"))
        rules.append((q, "1", q, "1", "R"))
    return TuringMachine.make(5, 0, 4, tuple(rules))


def anbn_cfg() -> Cfg:
    """The matched-powers grammar S -> a S b | ε deriving {a^n b^n}."""
    return Cfg.make(("a", "b"), ("S",), "S", (("S", ("a", "S", "b")), ("S", ())))


def counting_edt0l() -> Edt0lSystem:
    """One-letter system deriving {a^n}: grow adds an a, emit finishes."""
    grow = MonoidMorphism.make(("a", "S"), ("a", "S"), {"a": ("a",), "S": ("a", "S")})
    emit = MonoidMorphism.make(("a", "S"), ("a", "S"), {"a": ("a",), "S": ()})
    return Edt0lSystem.make(("a",), ("S",), ("S",), (("grow", grow), ("emit", emit)))
