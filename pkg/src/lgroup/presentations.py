"""Marked group presentations whose relator sets come from languages.

A marked presentation is an ordered generator tuple plus a relator source:
a finite list, a rewriting system whose language (decoded over the
symmetrized generators) is the relator set, or an iterated presentation
(finite words imposed once, plus words closed under a finite set of group
endomorphisms).  Budgeted enumeration, generator elimination, the two
conversions between system-backed and iterated presentations, and the
doubling gadget used to compare relator languages all live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from .lsystems import (
    Dtf0lSystem,
    Edt0lSystem,
    Hdt0lSystem,
    dtf0l_fin_to_edt0l,
    edt0l_to_hdt0l,
    enumerate_words,
)
from .words import (
    GroupEndomorphism,
    GroupWord,
    MonoidMorphism,
    base_letter,
    check_alphabet,
    check_symbol,
    free_reduce,
    fresh_symbol,
    group_to_monoid,
    inverse_closure,
    invert,
    is_inverse_letter,
    monoid_to_group,
    sort_group_words,
)

__all__ = [
    "FiniteRelators",
    "LPresentation",
    "MarkedPresentation",
    "relators",
    "enumerated",
    "substitute_generators",
    "edt0l_to_lpresentation",
    "lpresentation_to_dtf0l_fin",
    "tietze_eliminate",
    "change_generators",
    "amalgam_gadget",
]


def _check_group_word(w, gens, what) -> GroupWord:
    w = free_reduce(w)
    for name, _ in w:
        if name not in gens:
            raise ValueError(f"{what} uses unknown generator {name!r}")
    return w


@dataclass(frozen=True)
class FiniteRelators:
    words: Tuple[GroupWord, ...]


@dataclass(frozen=True)
class LPresentation:
    """Generators, once-imposed relators, named endomorphisms, iterated relators.

    The relator set is the once-imposed words together with every image of
    an iterated word under a composition of the endomorphisms.  In the text
    format the once/iterated blocks are spelled `Q { ... }` and `R { ... }`.
    """

    generators: Tuple[str, ...]
    once: Tuple[GroupWord, ...]
    endos: Tuple[Tuple[str, GroupEndomorphism], ...]
    iterated: Tuple[GroupWord, ...]

    @staticmethod
    def make(generators, once, endos, iterated) -> "LPresentation":
        generators = check_alphabet(generators)
        once = tuple(_check_group_word(w, generators, "once-relator") for w in once)
        iterated = tuple(
            _check_group_word(w, generators, "iterated relator") for w in iterated
        )
        rows = []
        seen = set()
        endo_pairs = endos.items() if hasattr(endos, "items") else endos
        for name, e in endo_pairs:
            check_symbol(name)
            if name in seen:
                raise ValueError(f"duplicate endomorphism name {name!r}")
            seen.add(name)
            if set(e.alphabet) != set(generators):
                raise ValueError(f"endomorphism {name!r} not over the generators")
            rows.append((name, e))
        if not rows:
            raise ValueError("an iterated presentation needs at least one endomorphism")
        return LPresentation(generators, once, tuple(rows), iterated)


RelatorSource = Union[FiniteRelators, Edt0lSystem, Hdt0lSystem, LPresentation]


@dataclass(frozen=True)
class MarkedPresentation:
    """Ordered generators plus a relator source; order is part of identity."""

    generators: Tuple[str, ...]
    source: RelatorSource

    @staticmethod
    def make(generators, source) -> "MarkedPresentation":
        generators = check_alphabet(generators)
        closure = set(inverse_closure(generators))
        if isinstance(source, FiniteRelators):
            source = FiniteRelators(
                tuple(_check_group_word(w, generators, "relator") for w in source.words)
            )
        elif isinstance(source, (Edt0lSystem, Hdt0lSystem)):
            if set(source.terminals) != closure:
                raise ValueError(
                    "relator system terminals must be the symmetrized generators"
                )
        elif isinstance(source, LPresentation):
            if source.generators != generators:
                raise ValueError("iterated presentation generators must match marking")
        else:
            raise TypeError(f"unsupported relator source {type(source).__name__}")
        return MarkedPresentation(generators, source)

    @staticmethod
    def finite(generators, words) -> "MarkedPresentation":
        return MarkedPresentation.make(
            tuple(generators), FiniteRelators(tuple(tuple(w) for w in words))
        )


def relators(p: MarkedPresentation, depth: int, length_cap: int) -> List[GroupWord]:
    """Budgeted relator enumeration: reduced, nontrivial, shortlex-sorted.

    For system-backed sources this decodes the language words enumerated to
    the given depth and length cap.  For an iterated presentation it is the
    once-imposed words plus all endomorphism compositions of the iterated
    words up to the depth; the cap applies to the reduced words.
    """
    src = p.source
    if isinstance(src, FiniteRelators):
        words = src.words
    elif isinstance(src, (Edt0lSystem, Hdt0lSystem)):
        words = [
            monoid_to_group(w) for w in enumerate_words(src, depth, length_cap)
        ]
    else:
        seen = set(src.iterated)
        frontier = list(seen)
        for _ in range(depth):
            nxt = []
            for w in frontier:
                for _, e in src.endos:
                    image = e(w)
                    if image not in seen:
                        seen.add(image)
                        nxt.append(image)
            if not nxt:
                break
            frontier = nxt
        words = list(src.once) + list(seen)
    reduced = {free_reduce(w) for w in words}
    reduced.discard(())
    return sort_group_words(
        (w for w in reduced if len(w) <= length_cap), p.generators
    )


def enumerated(p: MarkedPresentation, depth: int, length_cap: int) -> MarkedPresentation:
    """Freeze a budgeted relator enumeration into a finite-source presentation."""
    return MarkedPresentation.make(
        p.generators, FiniteRelators(tuple(relators(p, depth, length_cap)))
    )


def substitute_generators(w: Sequence, images: Mapping[str, GroupWord]) -> GroupWord:
    """Replace each letter by its image word (inverted for negative signs)."""
    out: List = []
    for name, sign in w:
        img = images[name]
        out.extend(img if sign == 1 else invert(img))
    return free_reduce(out)


def _promote_names(inner: Sequence[str], used: Iterable[str]) -> Dict[str, str]:
    """Give each inner monoid letter its own generator name.

    Letters spelled as formal inverses get a fresh non-inverse name, so the
    promoted letters behave as independent positive generators and no word
    machinery mistakes them for inverses.
    """
    taken = set(used)
    mapping: Dict[str, str] = {}
    for x in inner:
        base = f"{base_letter(x)}_bar" if is_inverse_letter(x) else x
        name = fresh_symbol(base, taken)
        taken.add(name)
        mapping[x] = name
    return mapping


def edt0l_to_lpresentation(p: MarkedPresentation) -> MarkedPresentation:
    """Trade a system-backed relator set for an iterated presentation.

    The system is first converted so that the terminal filter becomes a
    finishing morphism; every inner letter of the result is promoted to a
    fresh generator, the seed becomes the single iterated relator, the
    substitutions become endomorphisms (fixing the original generators),
    and one once-relator per inner letter equates it with its finished
    image.  Eliminating the promoted generators through those relations
    recovers the original relator language.
    """
    if not isinstance(p.source, Edt0lSystem):
        raise ValueError("expected a presentation backed by a terminal-filter system")
    h = edt0l_to_hdt0l(p.source)
    promote = _promote_names(h.inner, inverse_closure(p.generators))
    gens = tuple(promote[x] for x in h.inner) + p.generators

    def decode(word) -> GroupWord:
        return tuple((promote[x], 1) for x in word)

    endos = []
    for name, m in h.morphisms:
        images = {promote[x]: decode(m.image_map[x]) for x in h.inner}
        for s in p.generators:
            images[s] = ((s, 1),)
        endos.append((name, GroupEndomorphism.make(gens, images)))
    once = []
    for x in h.inner:
        rel = free_reduce(
            ((promote[x], 1),) + invert(monoid_to_group(h.final((x,))))
        )
        if rel:
            once.append(rel)
    iterated = [decode(h.seed)]
    lp = LPresentation.make(gens, once, endos, iterated)
    return MarkedPresentation.make(gens, lp)


def lpresentation_to_dtf0l_fin(p: MarkedPresentation) -> MarkedPresentation:
    """Realize an iterated relator set by a seed-set system plus finite part.

    The iterated words become the seeds, the endomorphisms act through
    their monoid encodings over the symmetrized generators, and the
    once-imposed words ride along as extra seeds of the folded system.
    """
    if not isinstance(p.source, LPresentation):
        raise ValueError("expected an iterated presentation")
    lp = p.source
    alphabet = inverse_closure(lp.generators)
    morphisms = [(name, e.as_monoid_morphism()) for name, e in lp.endos]
    seeds = [group_to_monoid(w) for w in lp.iterated]
    if not seeds:
        seeds = [()]
    sys = Dtf0lSystem.make(alphabet, seeds, morphisms)
    extra = [group_to_monoid(w) for w in lp.once]
    return MarkedPresentation.make(p.generators, dtf0l_fin_to_edt0l(sys, extra))


def tietze_eliminate(
    p: MarkedPresentation, gen: str, defining: Sequence
) -> MarkedPresentation:
    """Remove a generator that the relators equate with a word in the others.

    Requires a finite-source presentation (enumerate first for the others)
    whose relator list contains gen·defining⁻¹ up to free reduction, in
    either orientation.  Every occurrence of the generator is replaced by
    the defining word and the relators are reduced.
    """
    if not isinstance(p.source, FiniteRelators):
        raise ValueError("elimination needs a finite relator list; enumerate first")
    if gen not in p.generators:
        raise ValueError(f"no generator {gen!r} to eliminate")
    defining = free_reduce(defining)
    if any(name == gen for name, _ in defining):
        raise ValueError("defining word uses the generator being eliminated")
    for name, _ in defining:
        if name not in p.generators:
            raise ValueError(f"defining word uses unknown generator {name!r}")
    target = free_reduce(((gen, 1),) + invert(defining))
    present = any(
        free_reduce(r) in (target, invert(target)) for r in p.source.words
    )
    if not present:
        raise ValueError("no such relation present")
    images = {s: ((s, 1),) for s in p.generators}
    images[gen] = defining
    new_words = []
    for r in p.source.words:
        image = substitute_generators(r, images)
        if image and image not in new_words:
            new_words.append(image)
    new_gens = tuple(s for s in p.generators if s != gen)
    return MarkedPresentation.make(new_gens, FiniteRelators(tuple(new_words)))


def change_generators(
    p: MarkedPresentation,
    new_gens: Sequence[Tuple[str, Sequence]],
    witnesses: Mapping[str, Sequence],
) -> MarkedPresentation:
    """Remark a finite presentation on a new generating tuple.

    `new_gens` lists (t, w_t) with w_t a word in the old generators
    defining t; `witnesses` gives, for every old generator s, a word w_s in
    the new generators that the caller asserts equals s.  The output is the
    old relators rewritten through the witnesses plus one relator
    t·(w_t rewritten)⁻¹ per new generator.
    """
    if not isinstance(p.source, FiniteRelators):
        raise ValueError("remarking needs a finite relator list; enumerate first")
    names = tuple(t for t, _ in new_gens)
    t_gens = check_alphabet(names)
    defs = {
        t: _check_group_word(w_t, p.generators, f"defining word for {t!r}")
        for t, w_t in new_gens
    }
    w_s: Dict[str, GroupWord] = {}
    for s in p.generators:
        if s not in witnesses:
            raise ValueError(f"missing witness word for generator {s!r}")
        w_s[s] = _check_group_word(witnesses[s], t_gens, f"witness for {s!r}")
    new_words: List[GroupWord] = []
    for r in p.source.words:
        image = substitute_generators(r, w_s)
        if image and image not in new_words:
            new_words.append(image)
    for t in t_gens:
        rel = free_reduce(((t, 1),) + invert(substitute_generators(defs[t], w_s)))
        if rel and rel not in new_words:
            new_words.append(rel)
    return MarkedPresentation.make(t_gens, FiniteRelators(tuple(new_words)))


def _hat_name(letter: str) -> str:
    if is_inverse_letter(letter):
        return f"{base_letter(letter)}_hat_inv"
    return f"{letter}_hat"


def amalgam_gadget(sys: Edt0lSystem) -> MarkedPresentation:
    """Doubling gadget: one relator w·a·w·ŵ·b·ŵ per language word w.

    The input system's language, decoded over generators S, determines a
    presentation on S, a disjoint hatted copy of S, and two fresh
    generators a and b.  Both copies of every language word are produced by
    one run of the substitutions, so the relator set is exactly
    {w a w ŵ b ŵ : w in the language}; for the empty word this degenerates
    to the relator ab.
    """
    base_gens = tuple(t for t in sys.terminals if not is_inverse_letter(t))
    if set(sys.terminals) != set(inverse_closure(base_gens)):
        raise ValueError("gadget input terminals must be symmetrized generators")
    if "a" in base_gens or "b" in base_gens:
        raise ValueError("generator names a and b are reserved by the gadget")
    hatted = tuple(f"{s}_hat" for s in base_gens)
    clash = (set(hatted) | {"a", "b"}) & set(base_gens + sys.nonterminals)
    if clash or len(set(hatted)) != len(hatted):
        raise ValueError(f"hatted-name clash: {sorted(clash) or 'duplicate hats'}")
    gens = base_gens + hatted + ("a", "b")
    terminals = inverse_closure(gens)
    hat_nts = tuple(_hat_name(x) for x in sys.nonterminals)
    if set(hat_nts) & set(terminals + sys.nonterminals):
        raise ValueError("hatted-name clash on nonterminals")
    nonterminals = sys.nonterminals + hat_nts
    alphabet = terminals + nonterminals

    def hat_word(w):
        return tuple(_hat_name(x) for x in w)

    rows = []
    for name, m in sys.morphisms:
        images = {x: m.image_map[x] for x in sys.alphabet}
        for x in sys.alphabet:
            images[_hat_name(x)] = hat_word(m.image_map[x])
        for extra in ("a", "a_inv", "b", "b_inv"):
            images[extra] = (extra,)
        rows.append((name, MonoidMorphism.make(alphabet, alphabet, images)))
    w0 = sys.seed
    seed = w0 + ("a",) + w0 + hat_word(w0) + ("b",) + hat_word(w0)
    out_sys = Edt0lSystem.make(terminals, nonterminals, seed, rows)
    return MarkedPresentation.make(gens, out_sys)
