"""Iterated-substitution systems and conversions between their flavours.

A system is a seed word plus a named finite set of substitutions.  Variants
differ in how raw orbit words are turned into the language: a terminal
filter (nonterminal alphabet), a finishing morphism applied to every orbit
word, or a regular control language restricting which substitution
sequences count.  All language questions here are budgeted: `enumerate_words`
materializes the orbit to a fixed composition depth and keeps the words
within a length cap.  Conversions preserve languages exactly, with the two
documented caveats (a possible extra empty word, and a depth offset of one
for constructions that spend a step on an emitting morphism).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from .automata import ControlLanguage, Dfa, letter_tracking_dfa, product
from .words import (
    GroupEndomorphism,
    MonoidMorphism,
    MonoidWord,
    base_letter,
    check_alphabet,
    fresh_symbol,
    is_inverse_letter,
    sort_monoid_words,
)

__all__ = [
    "Dt0lSystem",
    "Dtf0lSystem",
    "Edt0lSystem",
    "Hdt0lSystem",
    "ControlledEdt0l",
    "enumerate_words",
    "dtf0l_fin_to_edt0l",
    "hdt0l_to_edt0l",
    "edt0l_to_hdt0l",
    "eliminate_control",
    "group_substitution",
    "restrict_to_terminal_control",
    "uniform_annotation_check",
]

MorphismTable = Tuple[Tuple[str, MonoidMorphism], ...]


def _check_morphisms(alphabet, morphisms) -> MorphismTable:
    rows = []
    seen = set()
    for name, m in morphisms:
        if name in seen:
            raise ValueError(f"duplicate morphism name {name!r}")
        seen.add(name)
        if set(m.domain) != set(alphabet) or set(m.codomain) != set(alphabet):
            raise ValueError(f"morphism {name!r} not an endomorphism of the alphabet")
        rows.append((name, m))
    if not rows:
        raise ValueError("a system needs at least one morphism")
    return tuple(rows)


def _check_word(w, alphabet, what) -> MonoidWord:
    w = tuple(w)
    for x in w:
        if x not in alphabet:
            raise ValueError(f"{what} letter {x!r} not in alphabet")
    return w


def _as_morphism_pairs(morphisms):
    if hasattr(morphisms, "items"):
        return tuple(morphisms.items())
    return tuple(morphisms)


@dataclass(frozen=True)
class Dt0lSystem:
    alphabet: Tuple[str, ...]
    seed: MonoidWord
    morphisms: MorphismTable

    @staticmethod
    def make(alphabet, seed, morphisms) -> "Dt0lSystem":
        alphabet = check_alphabet(alphabet)
        pairs = _check_morphisms(alphabet, _as_morphism_pairs(morphisms))
        return Dt0lSystem(alphabet, _check_word(seed, alphabet, "seed"), pairs)

    @property
    def terminals(self) -> Tuple[str, ...]:
        return self.alphabet

    def seeds_list(self) -> Tuple[MonoidWord, ...]:
        return (self.seed,)


@dataclass(frozen=True)
class Dtf0lSystem:
    alphabet: Tuple[str, ...]
    seeds: Tuple[MonoidWord, ...]
    morphisms: MorphismTable

    @staticmethod
    def make(alphabet, seeds, morphisms) -> "Dtf0lSystem":
        alphabet = check_alphabet(alphabet)
        seeds = tuple(_check_word(s, alphabet, "seed") for s in seeds)
        if not seeds:
            raise ValueError("seed set must be nonempty")
        pairs = _check_morphisms(alphabet, _as_morphism_pairs(morphisms))
        return Dtf0lSystem(alphabet, seeds, pairs)

    @property
    def terminals(self) -> Tuple[str, ...]:
        return self.alphabet

    def seeds_list(self) -> Tuple[MonoidWord, ...]:
        return self.seeds


@dataclass(frozen=True)
class Edt0lSystem:
    terminals: Tuple[str, ...]
    nonterminals: Tuple[str, ...]
    seed: MonoidWord
    morphisms: MorphismTable

    @staticmethod
    def make(terminals, nonterminals, seed, morphisms) -> "Edt0lSystem":
        terminals = check_alphabet(terminals)
        nonterminals = check_alphabet(nonterminals)
        overlap = set(terminals) & set(nonterminals)
        if overlap:
            raise ValueError(f"terminals and nonterminals overlap: {sorted(overlap)}")
        alphabet = terminals + nonterminals
        pairs = _check_morphisms(alphabet, _as_morphism_pairs(morphisms))
        return Edt0lSystem(
            terminals, nonterminals, _check_word(seed, alphabet, "seed"), pairs
        )

    @property
    def alphabet(self) -> Tuple[str, ...]:
        return self.terminals + self.nonterminals

    def seeds_list(self) -> Tuple[MonoidWord, ...]:
        return (self.seed,)


@dataclass(frozen=True)
class Hdt0lSystem:
    inner: Tuple[str, ...]
    seed: MonoidWord
    morphisms: MorphismTable
    final: MonoidMorphism

    @staticmethod
    def make(inner, seed, morphisms, final) -> "Hdt0lSystem":
        inner = check_alphabet(inner)
        pairs = _check_morphisms(inner, _as_morphism_pairs(morphisms))
        if set(final.domain) != set(inner):
            raise ValueError("final morphism domain must be the inner alphabet")
        return Hdt0lSystem(inner, _check_word(seed, inner, "seed"), pairs, final)

    @property
    def alphabet(self) -> Tuple[str, ...]:
        return self.inner

    @property
    def terminals(self) -> Tuple[str, ...]:
        return self.final.codomain

    def seeds_list(self) -> Tuple[MonoidWord, ...]:
        return (self.seed,)


@dataclass(frozen=True)
class ControlledEdt0l:
    system: Edt0lSystem
    control: ControlLanguage

    @staticmethod
    def make(system: Edt0lSystem, control: ControlLanguage) -> "ControlledEdt0l":
        names = {name for name, _ in system.morphisms}
        if set(control.alphabet) != names:
            raise ValueError("control alphabet must be the system's morphism names")
        return ControlledEdt0l(system, control)

    @property
    def terminals(self) -> Tuple[str, ...]:
        return self.system.terminals


FormCheck = Optional[Callable[[MonoidWord], None]]

_STATE_TAG = re.compile(r"\A(.*)_q(\d+)\Z")


def annotation_state(letter: str) -> Optional[int]:
    """State index carried in a letter name, or None for a plain letter.

    Inverse letters carry the tag before the inverse suffix, so the base
    name is inspected.  Only the innermost (last-attached) tag is reported.
    """
    name = base_letter(letter) if is_inverse_letter(letter) else letter
    m = _STATE_TAG.match(name)
    return int(m.group(2)) if m else None


def uniform_annotation_check(what: str = "sentential form") -> Callable[[MonoidWord], None]:
    """Checker for enumerate_words: forms must be uniformly state-tagged.

    A form passes when either no letter carries a state tag or every letter
    carries the same one.  Conversion outputs that annotate letters with
    automaton states maintain this; a violation means a broken construction.
    """

    def check(form: MonoidWord) -> None:
        states = {annotation_state(x) for x in form}
        if len(states) > 1:
            raise AssertionError(f"non-uniform state annotation in {what}: {form}")

    return check


def _annotate_name(letter: str, state: int) -> str:
    # keep inverse pairs paired: tag the base name, then restore the suffix
    if is_inverse_letter(letter):
        return f"{base_letter(letter)}_q{state}_inv"
    return f"{letter}_q{state}"


def group_substitution(generators, images) -> MonoidMorphism:
    """Substitution on the symmetrized alphabet encoding a group endomorphism.

    `images` maps some of the positive generators to group words; omitted
    generators are fixed.  The result maps each formal inverse letter to
    the reversed inverse image, which is the shape the quotient drivers
    require of relator systems.
    """
    table = {s: ((s, 1),) for s in generators}
    table.update(images)
    return GroupEndomorphism.make(generators, table).as_monoid_morphism()


def _orbit(seeds, morphisms, depth: int, form_check: FormCheck = None):
    """All words reachable from the seeds by at most `depth` substitutions.

    Repeated forms are expanded once; revisiting a form later can only
    reproduce a suffix of the exploration already done from its first visit.
    """
    seen = set(seeds)
    frontier: List[MonoidWord] = list(seen)
    if form_check is not None:
        for w in frontier:
            form_check(w)
    for _ in range(depth):
        nxt: List[MonoidWord] = []
        for w in frontier:
            for _, m in morphisms:
                image = m(w)
                if image not in seen:
                    seen.add(image)
                    if form_check is not None:
                        form_check(image)
                    nxt.append(image)
        if not nxt:
            break
        frontier = nxt
    return seen


def enumerate_words(
    sys, depth: int, length_cap: int, form_check: FormCheck = None
) -> List[MonoidWord]:
    """Language words of composition depth ≤ depth and length ≤ length_cap.

    The result is exactly the set of language words arising from some
    composition of at most `depth` substitutions, filtered to the length
    cap, deduplicated, and shortlex-sorted by the output alphabet.  The cap
    applies to collected words only; intermediate forms are never pruned,
    so erasing substitutions cannot be starved by a small cap.
    """
    if depth < 0 or length_cap < 0:
        raise ValueError("depth and length_cap must be nonnegative")
    if isinstance(sys, ControlledEdt0l):
        return _enumerate_controlled(sys, depth, length_cap, form_check)
    orbit = _orbit(sys.seeds_list(), sys.morphisms, depth, form_check)
    if isinstance(sys, Edt0lSystem):
        terminals = set(sys.terminals)
        words = {w for w in orbit if set(w) <= terminals}
        out_alphabet = sys.terminals
    elif isinstance(sys, Hdt0lSystem):
        words = {sys.final(w) for w in orbit}
        out_alphabet = sys.final.codomain
    else:
        words = orbit
        out_alphabet = sys.alphabet
    return sort_monoid_words((w for w in words if len(w) <= length_cap), out_alphabet)


def _enumerate_controlled(
    csys: ControlledEdt0l, depth: int, length_cap: int, form_check: FormCheck
) -> List[MonoidWord]:
    sys = csys.system
    dfa = csys.control.dfa
    start = (sys.seed, dfa.initial)
    seen = {start}
    if form_check is not None:
        form_check(sys.seed)
    frontier = [start]
    terminals = set(sys.terminals)
    words = set()

    def collect(form, state):
        if state in dfa.accepting and set(form) <= terminals:
            words.add(form)

    collect(*start)
    for _ in range(depth):
        nxt = []
        for form, state in frontier:
            for name, m in sys.morphisms:
                pair = (m(form), dfa.step(state, name))
                if pair not in seen:
                    seen.add(pair)
                    if form_check is not None:
                        form_check(pair[0])
                    collect(*pair)
                    nxt.append(pair)
        if not nxt:
            break
        frontier = nxt
    return sort_monoid_words(
        (w for w in words if len(w) <= length_cap), sys.terminals
    )


def dtf0l_fin_to_edt0l(sys: Dtf0lSystem, extra: Sequence[MonoidWord]) -> Edt0lSystem:
    """Fold a finite seed set plus finitely many extra words into one seed.

    A fresh nonterminal N becomes the seed; for each original seed and each
    extra word there is a substitution sending N to it (identity elsewhere),
    and the original substitutions are extended to fix N.  Each original
    language word or extra word appears one composition step later than
    before.  Because the original substitutions keep acting after an extra
    word is planted, the language is the original one united with the full
    substitution orbit of the extra words; for extras this is exactly the
    extras themselves only when they are substitution-closed (the original
    language itself is always substitution-closed, so that side is exact).
    """
    extra = tuple(_check_word(w, sys.alphabet, "extra word") for w in extra)
    n = fresh_symbol("N", sys.alphabet)
    alphabet = sys.alphabet + (n,)
    used_names = [name for name, _ in sys.morphisms]
    rows: List[Tuple[str, MonoidMorphism]] = []
    for name, m in sys.morphisms:
        images = dict(m.images)
        images[n] = (n,)
        rows.append((name, MonoidMorphism.make(alphabet, alphabet, images)))
    for i, w in enumerate(sys.seeds + extra):
        name = fresh_symbol(f"init{i}", used_names)
        used_names.append(name)
        images = {x: (x,) for x in sys.alphabet}
        images[n] = w
        rows.append((name, MonoidMorphism.make(alphabet, alphabet, images)))
    return Edt0lSystem.make(sys.alphabet, (n,), (n,), rows)


def _rename_clashing_inner(sys: Hdt0lSystem):
    """Rename inner letters that collide with the output alphabet.

    Letters are renamed per base name so that a formal-inverse pair stays a
    pair under the downstream group-word decoding.
    """
    out = set(sys.final.codomain)
    inner = sys.inner
    bases = []
    for x in inner:
        b = base_letter(x) if is_inverse_letter(x) else x
        if b not in bases:
            bases.append(b)
    clashing = set()
    for x in inner:
        if x in out:
            clashing.add(base_letter(x) if is_inverse_letter(x) else x)
    rename: Dict[str, str] = {}
    taken = out | set(inner)
    for b in bases:
        if b not in clashing:
            continue
        k = 0
        while f"{b}_{k}" in taken or f"{b}_{k}_inv" in taken:
            k += 1
        fresh = f"{b}_{k}"
        taken.add(fresh)
        taken.add(f"{fresh}_inv")
        if b in inner:
            rename[b] = fresh
        if f"{b}_inv" in inner:
            rename[f"{b}_inv"] = f"{fresh}_inv"

    def rn(letter: str) -> str:
        return rename.get(letter, letter)

    return rn


def hdt0l_to_edt0l(sys: Hdt0lSystem) -> Edt0lSystem:
    """Make the finishing morphism a substitution step.

    Inner letters become nonterminals (renamed away from the output
    alphabet if needed), the output alphabet becomes the terminals, the
    original substitutions are extended to fix terminals, and one fresh
    "emit" substitution applies the finishing morphism letter-wise.  The
    language is preserved exactly; each word appears one step later.
    """
    rn = _rename_clashing_inner(sys)
    terminals = sys.final.codomain
    nonterminals = tuple(rn(x) for x in sys.inner)
    alphabet = terminals + nonterminals
    rows: List[Tuple[str, MonoidMorphism]] = []
    for name, m in sys.morphisms:
        images = {rn(x): tuple(rn(y) for y in w) for x, w in m.images}
        for a in terminals:
            images[a] = (a,)
        rows.append((name, MonoidMorphism.make(alphabet, alphabet, images)))
    emit_images = {rn(x): sys.final((x,)) for x in sys.inner}
    for a in terminals:
        emit_images[a] = (a,)
    emit = fresh_symbol("emit", [name for name, _ in sys.morphisms])
    rows.append((emit, MonoidMorphism.make(alphabet, alphabet, emit_images)))
    seed = tuple(rn(x) for x in sys.seed)
    return Edt0lSystem.make(terminals, nonterminals, seed, rows)


def edt0l_to_hdt0l(sys: Edt0lSystem) -> Hdt0lSystem:
    """Replace the terminal filter by a finishing morphism.

    Letters are annotated with the state of the letter-tracking automaton,
    so every orbit word is uniformly tagged with the exact set of letters
    it may use.  The finishing morphism keeps letters whose tag is a set of
    terminals and erases the whole word otherwise.  The output language is
    the input language, plus the empty word whenever some composition
    leaves a nonterminal letter alive.
    """
    tracking = letter_tracking_dfa(sys)
    dfa = tracking.dfa
    alphabet = sys.alphabet
    inner = tuple(
        _annotate_name(x, q) for q in range(dfa.n_states) for x in alphabet
    )
    rows: List[Tuple[str, MonoidMorphism]] = []
    for name, m in sys.morphisms:
        images = {}
        for q in range(dfa.n_states):
            nq = dfa.step(q, name)
            for x in alphabet:
                images[_annotate_name(x, q)] = tuple(
                    _annotate_name(y, nq) for y in m.image_map[x]
                )
        rows.append((name, MonoidMorphism.make(inner, inner, images)))
    final_images = {}
    for q in range(dfa.n_states):
        keep = q in dfa.accepting
        for x in alphabet:
            # accepting tags track terminal-only letter sets, so a tagged
            # nonterminal at an accepting state never occurs in the orbit
            survives = keep and x in sys.terminals
            final_images[_annotate_name(x, q)] = (x,) if survives else ()
    final = MonoidMorphism.make(inner, sys.terminals, final_images)
    seed = tuple(_annotate_name(x, dfa.initial) for x in sys.seed)
    return Hdt0lSystem.make(inner, seed, rows, final)


def eliminate_control(csys: ControlledEdt0l) -> Edt0lSystem:
    """Compile a control automaton into the substitutions themselves.

    Every letter is annotated with a control state; substitution m from
    state q becomes its own lifted substitution that advances the tag and
    sends letters tagged with any other state to a dead nonterminal.  An
    emit substitution strips tags on letters tagged with an accepting
    state.  A sentinel nonterminal, also state-tagged, rides along in every
    pre-emit form: it keeps forms whose untagged word would be terminal
    (in particular the empty one) out of the language until an accepting
    emit removes it.  The language is preserved, with a depth offset of
    one for the emit step.
    """
    sys = csys.system
    dfa = csys.control.dfa
    alphabet = sys.alphabet
    live_base = fresh_symbol("LIVE", alphabet)
    annotated = tuple(
        _annotate_name(x, q) for q in range(dfa.n_states) for x in (live_base,) + alphabet
    )
    dead = fresh_symbol("DEAD", annotated + alphabet)
    nonterminals = annotated + sys.nonterminals + (dead,)
    full = sys.terminals + nonterminals
    lifted_names: List[str] = []
    rows: List[Tuple[str, MonoidMorphism]] = []
    for name, m in sys.morphisms:
        for q in range(dfa.n_states):
            nq = dfa.step(q, name)
            images = {x: (dead,) for x in alphabet}
            images[dead] = (dead,)
            for qq in range(dfa.n_states):
                match = qq == q
                images[_annotate_name(live_base, qq)] = (
                    (_annotate_name(live_base, nq),) if match else (dead,)
                )
                for x in alphabet:
                    if match:
                        images[_annotate_name(x, qq)] = tuple(
                            _annotate_name(y, nq) for y in m.image_map[x]
                        )
                    else:
                        images[_annotate_name(x, qq)] = (dead,)
            lname = fresh_symbol(f"{name}_q{q}", lifted_names)
            lifted_names.append(lname)
            rows.append((lname, MonoidMorphism.make(full, full, images)))
    emit_images = {x: (x,) for x in alphabet}
    emit_images[dead] = (dead,)
    for q in range(dfa.n_states):
        keep = q in dfa.accepting
        emit_images[_annotate_name(live_base, q)] = () if keep else (dead,)
        for x in alphabet:
            emit_images[_annotate_name(x, q)] = (x,) if keep else (dead,)
    emit = fresh_symbol("emit", lifted_names)
    rows.append((emit, MonoidMorphism.make(full, full, emit_images)))
    seed = (_annotate_name(live_base, dfa.initial),) + tuple(
        _annotate_name(x, dfa.initial) for x in sys.seed
    )
    return Edt0lSystem.make(sys.terminals, nonterminals, seed, rows)


def restrict_to_terminal_control(csys: ControlledEdt0l) -> ControlledEdt0l:
    """Intersect the control with the letter-tracking automaton.

    The language is unchanged; afterwards every accepted control word maps
    the seed into the terminal submonoid.
    """
    tracking = letter_tracking_dfa(csys.system)
    combined = product(csys.control.dfa, tracking.dfa)
    return ControlledEdt0l.make(csys.system, ControlLanguage(combined))
