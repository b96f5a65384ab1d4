"""Exact arithmetic in a center-by-metabelian two-generator group.

The group is generated by a shift `a` and a lamp `b`, subject to: all
commutators of two lamps (conjugates b_i = a^-i b a^i) are central, and
the commutator of two lamps depends only on the gap between their
positions.  Every element then has a unique normal form

    a^shift  *  product of b_i^lamps[i] (positions ascending)
             *  product of d_j^center[j] (gaps j > 0 ascending)

where d_j is the commutator of the position-0 lamp with the position-j
lamp.  Throughout, the commutator convention is [x, y] = x^-1 y^-1 x y,
matching `words.commutator`, and d_{-j} = d_j^-1.

The multiplication law is derived, not copied from anywhere: shifting
conjugates lamps (a^-k b_i a^k = b_{i+k}), and sorting two lamp blocks
into one ascending block pays a central correction d_{i-j}^{-p*q} for
every left lamp b_i^p passing a right lamp b_j^q with i > j.  The law's
signs are pinned down by the unitriangular matrix models below, which
are independent quotients of the group: `matrix_of_element` composed
with `hall_from_word` must equal the direct matrix image of the word,
for every word.  The test suite enforces exactly that.

The distinguished central words f_k (the lamp commutated with k shifts
and then with a lamp again) form an alternative basis of the center;
`f_in_d_basis` and `central_f_coordinates` convert between the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, isqrt
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .lsystems import Edt0lSystem, group_substitution
from .presentations import MarkedPresentation
from .words import (
    GroupLetter,
    GroupWord,
    commutator,
    free_reduce,
    group_pow,
    inverse_closure,
    left_normed_commutator,
    parse_group_word,
)

__all__ = [
    "HallElement",
    "NotCentralPower",
    "UniTriMatrix",
    "central_f_coordinates",
    "central_word",
    "f_element",
    "f_image_exponent",
    "f_in_d_basis",
    "format_element",
    "hall_commutator",
    "hall_from_word",
    "hall_inv",
    "hall_mul",
    "hall_pow",
    "in_lower_central",
    "matrix_image",
    "matrix_model",
    "matrix_of_element",
    "pi1_edt0l",
    "pi2_edt0l",
    "truncated_presentation",
    "verify_f_k",
]


class NotCentralPower(Exception):
    """A matrix expected to be a power of the central generator is not."""


def _tidy(m: Mapping[int, int]) -> Tuple[Tuple[int, int], ...]:
    return tuple(sorted((k, v) for k, v in m.items() if v))


@dataclass(frozen=True)
class HallElement:
    shift: int
    lamps: Tuple[Tuple[int, int], ...]
    center: Tuple[Tuple[int, int], ...]

    @staticmethod
    def make(
        shift: int, lamps: Mapping[int, int], center: Mapping[int, int]
    ) -> "HallElement":
        for j in center:
            if j <= 0:
                raise ValueError("central coordinates are indexed by positive gaps")
        return HallElement(shift, _tidy(lamps), _tidy(center))

    @staticmethod
    def identity() -> "HallElement":
        return HallElement(0, (), ())

    @property
    def is_identity(self) -> bool:
        return self.shift == 0 and not self.lamps and not self.center

    @property
    def is_central(self) -> bool:
        return self.shift == 0 and not self.lamps


_A = HallElement(1, (), ())
_B = HallElement(0, ((0, 1),), ())


def hall_mul(x: HallElement, y: HallElement) -> HallElement:
    """Product in normal form.

    y's shift drags x's lamps to higher positions before the two lamp
    blocks merge; merging pays one central correction per crossing pair.
    """
    moved = {i + y.shift: v for i, v in x.lamps}
    lamps = dict(moved)
    for j, v in y.lamps:
        lamps[j] = lamps.get(j, 0) + v
    center = dict(x.center)
    for j, v in y.center:
        center[j] = center.get(j, 0) + v
    for i, p in moved.items():
        for j, q in y.lamps:
            if i > j:
                center[i - j] = center.get(i - j, 0) - p * q
    return HallElement.make(x.shift + y.shift, lamps, center)


def hall_inv(x: HallElement) -> HallElement:
    # the shift and lamp blocks invert directly; the central block is
    # whatever cancels the corrections that the direct product incurs
    lamps = {i - x.shift: -v for i, v in x.lamps}
    probe = hall_mul(x, HallElement.make(-x.shift, lamps, {}))
    assert probe.shift == 0 and not probe.lamps
    return HallElement.make(-x.shift, lamps, {j: -v for j, v in probe.center})


def hall_pow(x: HallElement, k: int) -> HallElement:
    if k < 0:
        return hall_pow(hall_inv(x), -k)
    out = HallElement.identity()
    base = x
    while k:
        if k & 1:
            out = hall_mul(out, base)
        base = hall_mul(base, base)
        k >>= 1
    return out


def hall_commutator(x: HallElement, y: HallElement) -> HallElement:
    return hall_mul(hall_mul(hall_mul(hall_inv(x), hall_inv(y)), x), y)


def hall_from_word(w: GroupWord) -> HallElement:
    """Fold a word over the generators a, b into its normal form."""
    out = HallElement.identity()
    for name, sign in w:
        if name == "a":
            g = _A
        elif name == "b":
            g = _B
        else:
            raise ValueError(f"unknown generator {name!r}, expected a or b")
        out = hall_mul(out, g if sign > 0 else hall_inv(g))
    return out


def format_element(x: HallElement) -> str:
    parts = [f"shift {x.shift}"]
    parts.append(
        "lamps " + (" ".join(f"{i}:{v}" for i, v in x.lamps) if x.lamps else "-")
    )
    parts.append(
        "center " + (" ".join(f"{j}:{v}" for j, v in x.center) if x.center else "-")
    )
    return "; ".join(parts)


# --------------------------------------------------------------- center bases


def f_element(k: int) -> HallElement:
    """The k-th distinguished central element: the lamp bracketed with k
    shifts and then with the lamp again.

    The inner bracket's lamp block has the binomial coefficients of
    (t-1)^k as exponents; its central block is irrelevant because a
    commutator with a central cofactor dropped ignores it.
    """
    if k < 1:
        raise ValueError("index must be positive")
    inner = HallElement.make(
        0, {i: (-1) ** (k - i) * comb(k, i) for i in range(k + 1)}, {}
    )
    out = hall_commutator(inner, _B)
    assert out.is_central
    return out


def f_in_d_basis(k: int) -> Tuple[int, ...]:
    """Coordinates of f_k over (d_1, ..., d_k); the last is always -1."""
    x = f_element(k)
    coords = dict(x.center)
    if set(coords) - set(range(1, k + 1)):
        raise AssertionError("central support escaped the expected gaps")
    out = tuple(coords.get(j, 0) for j in range(1, k + 1))
    assert out[-1] == -1
    return out


def central_f_coordinates(x: HallElement) -> Tuple[int, ...]:
    """Coordinates of a central element over the f-basis.

    The change of basis is triangular with -1 on the diagonal, so the
    solution is integral and unique; solved from the top gap downward.
    """
    if not x.is_central:
        raise ValueError("element is not central")
    if not x.center:
        return ()
    n = max(j for j, _ in x.center)
    rows = [f_in_d_basis(k) for k in range(1, n + 1)]
    target = dict(x.center)
    coords = [0] * (n + 1)
    for k in range(n, 0, -1):
        acc = target.get(k, 0)
        for kk in range(k + 1, n + 1):
            acc -= coords[kk] * rows[kk - 1][k - 1]
        coords[k] = -acc
    return tuple(coords[1:])


def central_word(coords: Mapping[int, int]) -> GroupWord:
    """A word over a, b whose normal form is central with the given
    f-basis coordinates.

    Bracket words for the basis itself double in length with each extra
    shift, so high indices are reached differently: [b^p, a^-j b^q a^j]
    equals the gap-j central generator raised to p*q, and a near-square
    split of each gap exponent keeps the letter count near the square
    root of the coordinates instead of their full size.
    """
    total: Dict[int, int] = {}
    for k in sorted(coords):
        v = coords[k]
        if k < 1:
            raise ValueError("f-basis indices are positive")
        if not v:
            continue
        for j, c in enumerate(f_in_d_basis(k), start=1):
            total[j] = total.get(j, 0) + v * c
    a_word, b_word = (("a", 1),), (("b", 1),)
    letters: List[GroupLetter] = []
    for j in sorted(total):
        c = total[j]
        if not c:
            continue
        sign = 1 if c > 0 else -1
        root = isqrt(abs(c))
        bulk, rest = divmod(abs(c), root)
        for p, q in ((root, sign * bulk), (1, sign * rest)):
            if not q:
                continue
            conj = free_reduce(
                group_pow(a_word, -j) + group_pow(b_word, q) + group_pow(a_word, j)
            )
            letters.extend(commutator(group_pow(b_word, p), conj))
    return free_reduce(letters)


def _divide_by_shift_minus_one(poly: Dict[int, int]) -> Optional[Dict[int, int]]:
    # exact Laurent division by (t - 1): f(i) = q(i-1) - q(i)
    if not poly:
        return {}
    lo = min(poly)
    hi = max(poly)
    q: Dict[int, int] = {}
    prev = 0
    for i in range(lo, hi + 1):
        cur = prev - poly.get(i, 0)
        if cur:
            q[i] = cur
        prev = cur
    return q if prev == 0 else None


def in_lower_central(x: HallElement, k: int) -> bool:
    """Membership in the k-th lower central series term, for k <= 5.

    The lamp block must be divisible by (t-1)^(k-1) viewed as a Laurent
    polynomial; from k = 4 on there is additionally a central condition:
    stripping a canonical witness with the same lamp block must leave no
    f_1 coordinate.  (f_2 already lies in the fifth term: centrality of
    the gap-1 commutator kills it one weight early, so the f_1
    coordinate is the only central obstruction at both k = 4 and 5.)
    """
    if k < 1:
        raise ValueError("series index must be positive")
    if k > 5:
        raise ValueError("membership implemented for the first five terms only")
    if k == 1:
        return True
    if x.shift != 0:
        return False
    quotient = dict(x.lamps)
    for _ in range(k - 1):
        quotient = _divide_by_shift_minus_one(quotient)
        if quotient is None:
            return False
    if k <= 3:
        # the whole center sits inside the third term
        return True
    block = _B
    for _ in range(k - 1):
        block = hall_commutator(block, _A)
    witness = HallElement.identity()
    for s, coeff in quotient.items():
        shifted = hall_mul(hall_mul(hall_pow(_A, -s), block), hall_pow(_A, s))
        witness = hall_mul(witness, hall_pow(shifted, coeff))
    rest = hall_mul(x, hall_inv(witness))
    assert rest.is_central
    coords = central_f_coordinates(rest)
    return not coords or coords[0] == 0


# --------------------------------------------------------------- matrix model


@dataclass(frozen=True)
class UniTriMatrix:
    """Integer upper unitriangular square matrix."""

    rows: Tuple[Tuple[int, ...], ...]

    @staticmethod
    def make(rows: Sequence[Sequence[int]]) -> "UniTriMatrix":
        rows = tuple(tuple(r) for r in rows)
        n = len(rows)
        for i, r in enumerate(rows):
            if len(r) != n:
                raise ValueError("matrix is not square")
            if r[i] != 1:
                raise ValueError("diagonal entry is not 1")
            if any(r[j] for j in range(i)):
                raise ValueError("entry below the diagonal")
        return UniTriMatrix(rows)

    @staticmethod
    def identity(n: int) -> "UniTriMatrix":
        return UniTriMatrix(tuple(
            tuple(1 if i == j else 0 for j in range(n)) for i in range(n)
        ))

    @property
    def n(self) -> int:
        return len(self.rows)

    def mul(self, other: "UniTriMatrix") -> "UniTriMatrix":
        n = self.n
        if other.n != n:
            raise ValueError("dimension mismatch")
        a, b = self.rows, other.rows
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                row.append(sum(a[i][t] * b[t][j] for t in range(i, j + 1)))
            out.append(tuple(row))
        return UniTriMatrix(tuple(out))

    def inv(self) -> "UniTriMatrix":
        # I - N + N^2 - ... with N = self - I nilpotent
        n = self.n
        ident = UniTriMatrix.identity(n)
        nil = UniTriMatrix(tuple(
            tuple(self.rows[i][j] - ident.rows[i][j] for j in range(n))
            for i in range(n)
        ))
        total = [list(r) for r in ident.rows]
        power = ident.rows
        sign = 1
        for _ in range(n - 1):
            power = tuple(
                tuple(
                    sum(power[i][t] * nil.rows[t][j] for t in range(n))
                    for j in range(n)
                )
                for i in range(n)
            )
            sign = -sign
            for i in range(n):
                for j in range(n):
                    total[i][j] += sign * power[i][j]
        return UniTriMatrix.make(total)

    def pow(self, k: int) -> "UniTriMatrix":
        if k < 0:
            return self.inv().pow(-k)
        out = UniTriMatrix.identity(self.n)
        base = self
        while k:
            if k & 1:
                out = out.mul(base)
            base = base.mul(base)
            k >>= 1
        return out


def _mat_commutator(x: UniTriMatrix, y: UniTriMatrix) -> UniTriMatrix:
    return x.inv().mul(y.inv()).mul(x).mul(y)


def matrix_model(n: int) -> Tuple[UniTriMatrix, UniTriMatrix, UniTriMatrix]:
    """The dimension-n unitriangular model (a, b, c).

    a is the full superdiagonal, b marks the two corner superdiagonal
    slots, and c, the top-right corner, generates the relevant center.
    """
    if n <= 3:
        raise ValueError("the matrix model needs dimension at least 4")
    ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    a = [row[:] for row in ident]
    for i in range(n - 1):
        a[i][i + 1] = 1
    b = [row[:] for row in ident]
    b[0][1] = 1
    b[n - 2][n - 1] = 1
    c = [row[:] for row in ident]
    c[0][n - 1] = 1
    return UniTriMatrix.make(a), UniTriMatrix.make(b), UniTriMatrix.make(c)


def matrix_image(w: GroupWord, n: int) -> UniTriMatrix:
    """Image of a word over a, b in the dimension-n model."""
    a, b, _ = matrix_model(n)
    out = UniTriMatrix.identity(n)
    for name, sign in w:
        if name == "a":
            g = a
        elif name == "b":
            g = b
        else:
            raise ValueError(f"unknown generator {name!r}, expected a or b")
        out = out.mul(g if sign > 0 else g.inv())
    return out


def matrix_of_element(x: HallElement, n: int) -> UniTriMatrix:
    """Image of a normal form in the dimension-n model.

    Maps the shift to a, position-i lamps to the conjugate a^-i b a^i,
    and each central basis element to the matrix commutator it names.
    Together with `matrix_image` this pins the sign conventions of
    `hall_mul`: both routes must give the same matrix for every word.
    """
    a, b, _ = matrix_model(n)
    out = a.pow(x.shift)
    for i, v in x.lamps:
        out = out.mul(a.pow(-i).mul(b).mul(a.pow(i)).pow(v))
    for j, v in x.center:
        d_j = _mat_commutator(b, a.pow(-j).mul(b).mul(a.pow(j)))
        out = out.mul(d_j.pow(v))
    return out


def verify_f_k(n: int, k: int) -> int:
    """Exponent t with f_k = c^t in the dimension-n model.

    Computed by exact matrix arithmetic; raises NotCentralPower if the
    bracket fails to land on a power of c (it never does within the
    stated range).
    """
    if n <= 3:
        raise ValueError("the matrix model needs dimension at least 4")
    if not 1 <= k <= n - 3:
        raise ValueError("bracket depth must lie between 1 and n-3")
    a, b, _ = matrix_model(n)
    u = b
    for _ in range(k):
        u = _mat_commutator(u, a)
    f = _mat_commutator(u, b)
    t = f.rows[0][n - 1]
    expected = UniTriMatrix.identity(n).rows
    for i in range(n):
        for j in range(n):
            want = t if (i, j) == (0, n - 1) else expected[i][j]
            if f.rows[i][j] != want:
                raise NotCentralPower(f"entry ({i},{j}) spoils the central form")
    return t


def f_image_exponent(n: int, k: int) -> int:
    """Closed form for verify_f_k, extended to every bracket depth.

    Below the critical depth the exponent is a signed binomial; at depth
    n-3 it collapses to 0 or 2 by parity; deeper brackets die entirely.
    """
    if n <= 3:
        raise ValueError("the matrix model needs dimension at least 4")
    if k < 1:
        raise ValueError("bracket depth must be positive")
    if k < n - 3:
        return (-1) ** n * comb(n - 4, k - 1)
    if k == n - 3:
        return 0 if n % 2 else 2
    return 0


# ------------------------------------------------------------- presentations


def _gw(text: str) -> GroupWord:
    return parse_group_word(text, alphabet=("a", "b", "core", "lamp", "start"))


def pi2_edt0l() -> MarkedPresentation:
    """Presentation whose relators bracket the lamp with growing shift

    depth: the orbit emits [b, k*a, b, x] for x in {a, b} and every
    k >= 0 (k = 0 reduces to the empty word).  The nonterminal `core`
    holds the inner bracket and one substitution deepens it.
    """
    positive = ("a", "b", "core", "start")
    morphisms = (
        ("init_a", group_substitution(
            positive, {"start": commutator(commutator(_gw("core"), _gw("b")), _gw("a"))}
        )),
        ("init_b", group_substitution(
            positive, {"start": commutator(commutator(_gw("core"), _gw("b")), _gw("b"))}
        )),
        ("deepen", group_substitution(
            positive, {"core": commutator(_gw("core"), _gw("a"))}
        )),
        ("emit", group_substitution(positive, {"core": _gw("b"), "start": ()})),
    )
    sys = Edt0lSystem.make(
        inverse_closure(("a", "b")),
        inverse_closure(("core", "start")),
        ("start",),
        morphisms,
    )
    return MarkedPresentation.make(("a", "b"), sys)


def pi1_edt0l() -> MarkedPresentation:
    """Presentation whose relators make every lamp commutator central:

    the orbit emits [b, a^-i b a^i, x] for x in {a, b} and every integer
    i (i = 0 reduces to the empty word).  The nonterminal `lamp` is the
    moving conjugate; two substitutions shift it either way.
    """
    positive = ("a", "b", "lamp", "start")
    morphisms = (
        ("init_a", group_substitution(
            positive, {"start": commutator(commutator(_gw("b"), _gw("lamp")), _gw("a"))}
        )),
        ("init_b", group_substitution(
            positive, {"start": commutator(commutator(_gw("b"), _gw("lamp")), _gw("b"))}
        )),
        ("shift_r", group_substitution(positive, {"lamp": _gw("a^-1 lamp a")})),
        ("shift_l", group_substitution(positive, {"lamp": _gw("a lamp a^-1")})),
        ("emit", group_substitution(positive, {"lamp": _gw("b"), "start": ()})),
    )
    sys = Edt0lSystem.make(
        inverse_closure(("a", "b")),
        inverse_closure(("lamp", "start")),
        ("start",),
        morphisms,
    )
    return MarkedPresentation.make(("a", "b"), sys)


def truncated_presentation(n: int) -> MarkedPresentation:
    """Reference finite presentation of the class-(n-1) truncation.

    For n >= 4 the relators are the bracketed lamp pairs up to depth
    n-3 plus the two cutoff brackets; small n collapse to the one or two
    brackets that remain meaningful.
    """
    if n < 2:
        raise ValueError("truncation degree must be at least 2")
    b, a = _gw("b"), _gw("a")

    def bracket(k: int, tail: List[GroupWord]) -> GroupWord:
        return free_reduce(left_normed_commutator([b] + [a] * k + tail))

    if n == 2:
        words = [bracket(1, [])]
    elif n == 3:
        words = [bracket(2, []), bracket(1, [b])]
    else:
        words = []
        for k in range(1, n - 2):
            words.append(bracket(k, [b, a]))
            words.append(bracket(k, [b, b]))
        words.append(bracket(n - 1, []))
        words.append(bracket(n - 2, [b]))
    return MarkedPresentation.finite(("a", "b"), words)
