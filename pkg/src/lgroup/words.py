"""Alphabets, monoid and group words, free reduction, and substitution morphisms.

Conventions used across the package:

* a *monoid word* is a tuple of letter names (strings);
* a *group word* is a tuple of ``(name, sign)`` pairs with ``sign`` in ``{+1, -1}``;
* an alphabet is an ordered tuple of distinct names, and all deterministic
  ordering (shortlex) uses the declaration order;
* group words are encoded as monoid words by spelling the inverse of ``x`` as
  the distinct letter ``x_inv``.  The inverse letters are ordinary, independent
  monoid symbols: a monoid morphism may map ``a -> a`` and ``a_inv -> a a``.

The token ``eps`` in word text denotes the declared symbol of that name when
the ambient alphabet has one, and the empty word otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Tuple

MonoidWord = Tuple[str, ...]
GroupLetter = Tuple[str, int]
GroupWord = Tuple[GroupLetter, ...]

SYMBOL_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

INV_SUFFIX = "_inv"


def check_symbol(name: str) -> str:
    if not SYMBOL_RE.match(name):
        raise ValueError(f"invalid symbol name: {name!r}")
    return name


def check_alphabet(letters: Sequence[str]) -> Tuple[str, ...]:
    seen = set()
    for name in letters:
        check_symbol(name)
        if name in seen:
            raise ValueError(f"duplicate symbol in alphabet: {name!r}")
        seen.add(name)
    return tuple(letters)


# ---------------------------------------------------------------------------
# free reduction and elementary group-word algebra


def free_reduce(w: Iterable[GroupLetter]) -> GroupWord:
    """Reduced form of a group word: no adjacent (s,+1)(s,-1) or (s,-1)(s,+1)."""
    out: list[GroupLetter] = []
    for name, sign in w:
        if sign not in (1, -1):
            raise ValueError(f"group letter sign must be +1 or -1, got {sign}")
        if out and out[-1][0] == name and out[-1][1] == -sign:
            out.pop()
        else:
            out.append((name, sign))
    return tuple(out)


def invert(w: Sequence[GroupLetter]) -> GroupWord:
    return tuple((name, -sign) for name, sign in reversed(w))


def group_pow(w: Sequence[GroupLetter], k: int) -> GroupWord:
    base = tuple(w) if k >= 0 else invert(w)
    return free_reduce(base * abs(k))


def commutator(x: Sequence[GroupLetter], y: Sequence[GroupLetter]) -> GroupWord:
    """Reduced form of x^-1 y^-1 x y."""
    return free_reduce(invert(x) + invert(y) + tuple(x) + tuple(y))


def left_normed_commutator(ws: Sequence[Sequence[GroupLetter]]) -> GroupWord:
    """[w1, w2, ..., wk] nested to the left: [[w1, w2], w3], ..."""
    if not ws:
        raise ValueError("need at least one word")
    acc = free_reduce(ws[0])
    for w in ws[1:]:
        acc = commutator(acc, w)
    return acc


# ---------------------------------------------------------------------------
# group <-> monoid encoding


def inverse_letter(name: str) -> str:
    return name + INV_SUFFIX


def is_inverse_letter(name: str) -> bool:
    return name.endswith(INV_SUFFIX) and len(name) > len(INV_SUFFIX)


def base_letter(name: str) -> str:
    return name[: -len(INV_SUFFIX)] if is_inverse_letter(name) else name


def inverse_closure(gens: Sequence[str]) -> Tuple[str, ...]:
    """Monoid alphabet [g1, g1_inv, g2, g2_inv, ...] for group generators."""
    gens = check_alphabet(gens)
    for g in gens:
        if is_inverse_letter(g) and base_letter(g) in gens:
            raise ValueError(f"generator name {g!r} collides with an inverse letter")
    out: list[str] = []
    for g in gens:
        out.append(g)
        out.append(inverse_letter(g))
    return check_alphabet(out)


def group_to_monoid(w: Sequence[GroupLetter]) -> MonoidWord:
    return tuple(name if sign > 0 else inverse_letter(name) for name, sign in w)


def monoid_to_group(w: Sequence[str]) -> GroupWord:
    return tuple(
        (base_letter(x), -1) if is_inverse_letter(x) else (x, 1) for x in w
    )


# ---------------------------------------------------------------------------
# morphisms


@dataclass(frozen=True)
class MonoidMorphism:
    """A total map letter -> word, extended multiplicatively to words."""

    domain: Tuple[str, ...]
    codomain: Tuple[str, ...]
    images: Tuple[Tuple[str, MonoidWord], ...]

    @staticmethod
    def make(
        domain: Sequence[str],
        codomain: Sequence[str],
        images: Mapping[str, Sequence[str]],
    ) -> "MonoidMorphism":
        domain = check_alphabet(domain)
        codomain = check_alphabet(codomain)
        missing = [x for x in domain if x not in images]
        if missing:
            raise ValueError(f"morphism not total, missing image for {missing}")
        cod = set(codomain)
        table = []
        for x in domain:
            img = tuple(images[x])
            bad = [y for y in img if y not in cod]
            if bad:
                raise ValueError(f"image of {x!r} uses letters outside codomain: {bad}")
            table.append((x, img))
        return MonoidMorphism(domain, codomain, tuple(table))

    @staticmethod
    def identity(alphabet: Sequence[str]) -> "MonoidMorphism":
        return MonoidMorphism.make(alphabet, alphabet, {x: (x,) for x in alphabet})

    @cached_property
    def image_map(self) -> dict:
        return dict(self.images)

    def __call__(self, w: Sequence[str]) -> MonoidWord:
        table = self.image_map
        out: list[str] = []
        for x in w:
            if x not in table:
                raise ValueError(f"letter {x!r} outside morphism domain")
            out.extend(table[x])
        return tuple(out)


@dataclass(frozen=True)
class GroupEndomorphism:
    """A map generator -> group word, extended to reduced words."""

    alphabet: Tuple[str, ...]
    images: Tuple[Tuple[str, GroupWord], ...]

    @staticmethod
    def make(
        alphabet: Sequence[str], images: Mapping[str, Sequence[GroupLetter]]
    ) -> "GroupEndomorphism":
        alphabet = check_alphabet(alphabet)
        missing = [s for s in alphabet if s not in images]
        if missing:
            raise ValueError(f"endomorphism not total, missing image for {missing}")
        dom = set(alphabet)
        table = []
        for s in alphabet:
            img = free_reduce(images[s])
            bad = [name for name, _ in img if name not in dom]
            if bad:
                raise ValueError(f"image of {s!r} uses letters outside alphabet: {bad}")
            table.append((s, img))
        return GroupEndomorphism(alphabet, tuple(table))

    @staticmethod
    def identity(alphabet: Sequence[str]) -> "GroupEndomorphism":
        return GroupEndomorphism.make(alphabet, {s: ((s, 1),) for s in alphabet})

    @cached_property
    def image_map(self) -> dict:
        return dict(self.images)

    def __call__(self, w: Sequence[GroupLetter]) -> GroupWord:
        table = self.image_map
        out: list[GroupLetter] = []
        for name, sign in w:
            if name not in table:
                raise ValueError(f"letter {name!r} outside endomorphism alphabet")
            img = table[name] if sign > 0 else invert(table[name])
            out.extend(img)
        return free_reduce(out)

    def as_monoid_morphism(self) -> MonoidMorphism:
        """The induced morphism on the inverse-closed monoid alphabet."""
        mon = inverse_closure(self.alphabet)
        images = {}
        for s, img in self.images:
            images[s] = group_to_monoid(img)
            images[inverse_letter(s)] = group_to_monoid(invert(img))
        return MonoidMorphism.make(mon, mon, images)


def apply_morphism(m, w):
    """Apply a MonoidMorphism to a monoid word or a GroupEndomorphism to a group word."""
    return m(w)


def compose(m2, m1):
    """Morphism applying m1 first, then m2.

    In a control word the first letter is the first morphism applied, so the
    composition realizing a control word u reads u left to right:
    compose(u[-1], compose(..., u[0])).
    """
    if isinstance(m2, MonoidMorphism) and isinstance(m1, MonoidMorphism):
        if m1.codomain != m2.domain:
            raise ValueError("codomain/domain mismatch in composition")
        return MonoidMorphism.make(
            m1.domain, m2.codomain, {x: m2(m1((x,))) for x in m1.domain}
        )
    if isinstance(m2, GroupEndomorphism) and isinstance(m1, GroupEndomorphism):
        if m1.alphabet != m2.alphabet:
            raise ValueError("codomain/domain mismatch in composition")
        return GroupEndomorphism.make(
            m1.alphabet, {s: m2(m1(((s, 1),))) for s in m1.alphabet}
        )
    raise TypeError("compose expects two morphisms of the same kind")


# ---------------------------------------------------------------------------
# shortlex ordering


def shortlex_key_monoid(w: Sequence[str], alphabet: Sequence[str]):
    rank = {x: i for i, x in enumerate(alphabet)}
    try:
        letters = tuple(rank[x] for x in w)
    except KeyError as e:
        raise ValueError(f"letter {e.args[0]!r} outside alphabet") from None
    return (len(w), letters)


def shortlex_key_group(w: Sequence[GroupLetter], gens: Sequence[str]):
    rank = {g: i for i, g in enumerate(gens)}
    try:
        letters = tuple(
            2 * rank[name] + (0 if sign > 0 else 1) for name, sign in w
        )
    except KeyError as e:
        raise ValueError(f"letter {e.args[0]!r} outside generators") from None
    return (len(w), letters)


def sort_monoid_words(words: Iterable[MonoidWord], alphabet: Sequence[str]):
    return sorted(set(words), key=lambda w: shortlex_key_monoid(w, alphabet))


def sort_group_words(words: Iterable[GroupWord], gens: Sequence[str]):
    return sorted(set(words), key=lambda w: shortlex_key_group(w, gens))


# ---------------------------------------------------------------------------
# word text encoding: `sym`, `sym^-1`, `sym^k`; `eps` is the declared symbol
# of that name if present, otherwise the empty word


def parse_group_word(text: str, alphabet: Sequence[str] | None = None) -> GroupWord:
    letters: list[GroupLetter] = []
    for token in text.split():
        name, _, exp = token.partition("^")
        check_symbol(name)
        k = 1
        if exp:
            try:
                k = int(exp)
            except ValueError:
                raise ValueError(f"bad exponent in token {token!r}") from None
        if name == "eps" and (alphabet is None or "eps" not in alphabet):
            continue
        if alphabet is not None and name not in alphabet:
            raise ValueError(f"letter {name!r} outside alphabet")
        sign = 1 if k > 0 else -1
        letters.extend([(name, sign)] * abs(k))
    return tuple(letters)


def format_group_word(w: Sequence[GroupLetter]) -> str:
    if not w:
        return "eps"
    return " ".join(name if sign > 0 else f"{name}^-1" for name, sign in w)


def parse_monoid_word(text: str, alphabet: Sequence[str] | None = None) -> MonoidWord:
    letters: list[str] = []
    for token in text.split():
        check_symbol(token)
        if token == "eps" and (alphabet is None or "eps" not in alphabet):
            continue
        if alphabet is not None and token not in alphabet:
            raise ValueError(f"letter {token!r} outside alphabet")
        letters.append(token)
    return tuple(letters)


def format_monoid_word(w: Sequence[str]) -> str:
    return " ".join(w) if w else "eps"


def fresh_symbol(base: str, used) -> str:
    """Pick `base` or the first `base_k` not present in `used`."""
    check_symbol(base)
    taken = set(used)
    if base not in taken:
        return base
    k = 0
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"
