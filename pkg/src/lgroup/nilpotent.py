"""Exact arithmetic in nilpotent quotients of finitely presented groups.

Two independent computational models live here.  Truncated Magnus
expansions decide triviality modulo a term of the lower central series
of a free group; they are exact there by Magnus's theorem but apply to
free groups only.  Weighted polycyclic presentations with collection
from the left cover finitely presented groups in general: the quotient
engine builds them class by class from a finite relator set, extending
by a central layer, enforcing consistency and the input relators over
the new layer, and reducing the resulting integer lattice to Hermite
form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .intlinalg import hermite_normal_form, hnf_pivots, invariant_factors
from .presentations import FiniteRelators, MarkedPresentation
from .words import GroupWord, check_alphabet, check_symbol, free_reduce


class BudgetExceeded(Exception):
    """A computation hit its explicit step or size budget."""


# ---------------------------------------------------------------------------
# Truncated noncommutative integer polynomials and the Magnus embedding.


Monomial = Tuple[str, ...]


@dataclass(frozen=True)
class TruncPoly:
    """Integer polynomial in noncommuting variables, truncated by degree.

    Monomials are tuples of variable names; every term of total degree
    `cap` or more is dropped.  No zero coefficients are stored, so
    structural equality is semantic equality.
    """

    variables: Tuple[str, ...]
    cap: int
    coeffs: Tuple[Tuple[Monomial, int], ...]

    @staticmethod
    def make(variables, cap: int, coeffs) -> "TruncPoly":
        variables = check_alphabet(variables)
        if cap < 1:
            raise ValueError("degree cap must be at least 1")
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        table: Dict[Monomial, int] = {}
        for mono, c in items:
            mono = tuple(mono)
            for v in mono:
                if v not in variables:
                    raise ValueError(f"monomial uses unknown variable {v!r}")
            if len(mono) >= cap or c == 0:
                continue
            table[mono] = table.get(mono, 0) + c
        cleaned = tuple(
            sorted(((m, c) for m, c in table.items() if c), key=lambda t: (len(t[0]), t[0]))
        )
        return TruncPoly(variables, cap, cleaned)

    @staticmethod
    def constant(variables, cap: int, value: int) -> "TruncPoly":
        return TruncPoly.make(variables, cap, {(): value})

    def add(self, other: "TruncPoly") -> "TruncPoly":
        self._match(other)
        table = dict(self.coeffs)
        for mono, c in other.coeffs:
            table[mono] = table.get(mono, 0) + c
        return TruncPoly.make(self.variables, self.cap, table)

    def mul(self, other: "TruncPoly") -> "TruncPoly":
        self._match(other)
        table: Dict[Monomial, int] = {}
        for m1, c1 in self.coeffs:
            for m2, c2 in other.coeffs:
                if len(m1) + len(m2) >= self.cap:
                    continue
                mono = m1 + m2
                table[mono] = table.get(mono, 0) + c1 * c2
        return TruncPoly.make(self.variables, self.cap, table)

    def scale(self, k: int) -> "TruncPoly":
        return TruncPoly.make(self.variables, self.cap, {m: k * c for m, c in self.coeffs})

    def degree_part(self, d: int) -> Tuple[Tuple[Monomial, int], ...]:
        return tuple((m, c) for m, c in self.coeffs if len(m) == d)

    def _match(self, other: "TruncPoly") -> None:
        if self.variables != other.variables or self.cap != other.cap:
            raise ValueError("polynomial variables and caps must match")


def _letter_series(variables, cap: int, name: str, sign: int) -> TruncPoly:
    # s maps to 1 + x, an inverse letter to the truncated geometric series
    if sign == 1:
        return TruncPoly.make(variables, cap, {(): 1, (name,): 1})
    table: Dict[Monomial, int] = {}
    for k in range(cap):
        table[(name,) * k] = -1 if k % 2 else 1
    return TruncPoly.make(variables, cap, table)


def magnus_expand(w: GroupWord, cap: int, variables=None) -> TruncPoly:
    """Image of a group word under the degree-truncated Magnus embedding."""
    w = tuple(w)
    if variables is None:
        variables = tuple(sorted({name for name, _ in w}))
    variables = check_alphabet(variables)
    acc = TruncPoly.constant(variables, cap, 1)
    for name, sign in w:
        if name not in variables:
            raise ValueError(f"letter {name!r} outside the variable set")
        acc = acc.mul(_letter_series(variables, cap, name, sign))
    return acc


def free_nilpotent_wp(w: GroupWord, cls: int) -> bool:
    """Is the word trivial in the free nilpotent group of the given class?"""
    if cls < 1:
        raise ValueError("nilpotency class must be at least 1")
    p = magnus_expand(w, cls + 1)
    return p.coeffs == (((), 1),)


# ---------------------------------------------------------------------------
# Weighted polycyclic presentations.


Vec = Tuple[Tuple[int, int], ...]


def _dense(vec: Vec, n: int) -> List[int]:
    out = [0] * n
    for i, e in vec:
        out[i] = e
    return out


def _sparse(dense: Sequence[int]) -> Vec:
    return tuple((i, e) for i, e in enumerate(dense) if e)


@dataclass(frozen=True)
class PcPresentation:
    """Weighted polycyclic presentation with an epimorphism record.

    Generator i has weight `weights[i]` and relative order `orders[i]`
    (0 means infinite).  `powers` holds (i, tail) for each finite-order
    generator, meaning a_i^{o_i} equals the tail word; `conjugations`
    holds (j, i, tail) for i < j, meaning a_j conjugated by a_i equals
    a_j followed by the tail.  Tails are normal-form vectors supported
    strictly beyond the left-hand generator.  `definitions` records how
    each generator arose: ("img", s) for the image of an original
    generator, ("comm", j, i) for the generator introduced by the
    conjugation relation (j, i), ("pow", i) for the one introduced by
    the power relation of i.  `epimorphism` maps each original
    generator to its image vector.
    """

    weights: Tuple[int, ...]
    orders: Tuple[int, ...]
    powers: Tuple[Tuple[int, Vec], ...]
    conjugations: Tuple[Tuple[int, int, Vec], ...]
    definitions: Tuple[Tuple, ...]
    marking: Tuple[str, ...]
    epimorphism: Tuple[Tuple[str, Vec], ...]
    nilpotency_class: int
    consistent: bool = True

    @staticmethod
    def make(
        weights,
        orders,
        powers,
        conjugations,
        definitions,
        marking,
        epimorphism,
        nilpotency_class: int,
        consistent: bool = True,
    ) -> "PcPresentation":
        weights = tuple(int(w) for w in weights)
        orders = tuple(int(o) for o in orders)
        n = len(weights)
        if len(orders) != n or len(definitions) != n:
            raise ValueError("weights, orders and definitions must align")
        if any(w < 1 for w in weights):
            raise ValueError("weights must be positive")
        if any(weights[i] > weights[i + 1] for i in range(n - 1)):
            raise ValueError("weights must be nondecreasing")
        if nilpotency_class < 1 or (n and weights[-1] > nilpotency_class):
            raise ValueError("weights must not exceed the nilpotency class")
        if any(o < 0 or o == 1 for o in orders):
            raise ValueError("relative orders are 0 (infinite) or at least 2")
        powers = tuple(sorted((int(i), tuple(v)) for i, v in powers))
        seen_pow = set()
        for i, tail in powers:
            if not 0 <= i < n or not orders[i] or i in seen_pow:
                raise ValueError("power tail on a bad or repeated generator")
            seen_pow.add(i)
            _check_tail(tail, i, n)
        conjugations = tuple(sorted((int(j), int(i), tuple(v)) for j, i, v in conjugations))
        seen_conj = set()
        for j, i, tail in conjugations:
            if not 0 <= i < j < n or (j, i) in seen_conj:
                raise ValueError("conjugation tail on a bad or repeated pair")
            seen_conj.add((j, i))
            _check_tail(tail, j, n)
        definitions = tuple(tuple(d) for d in definitions)
        marking = check_alphabet(marking)
        for d in definitions:
            if d[0] == "img":
                if len(d) != 2 or d[1] not in marking:
                    raise ValueError(f"bad image definition {d!r}")
            elif d[0] == "comm":
                if len(d) != 3 or not 0 <= d[2] < d[1] < n:
                    raise ValueError(f"bad commutator definition {d!r}")
            elif d[0] == "pow":
                if len(d) != 2 or not 0 <= d[1] < n:
                    raise ValueError(f"bad power definition {d!r}")
            else:
                raise ValueError(f"unknown definition kind {d!r}")
        epimorphism = tuple((s, tuple(v)) for s, v in epimorphism)
        if tuple(s for s, _ in epimorphism) != marking:
            raise ValueError("epimorphism record must list the marking in order")
        for _, v in epimorphism:
            _check_tail(v, -1, n)
        return PcPresentation(
            weights,
            orders,
            powers,
            conjugations,
            definitions,
            marking,
            epimorphism,
            nilpotency_class,
            bool(consistent),
        )

    @property
    def n_gens(self) -> int:
        return len(self.weights)


def _check_tail(tail: Vec, above: int, n: int) -> None:
    last = above
    for i, e in tail:
        if not isinstance(i, int) or not isinstance(e, int):
            raise ValueError("tails are (index, exponent) integer pairs")
        if i <= last or i >= n:
            raise ValueError("tail support must ascend strictly beyond the base")
        if e == 0:
            raise ValueError("tails store no zero exponents")
        last = i


# ---------------------------------------------------------------------------
# Collection from the left.


class _Collector:
    """Normal-form arithmetic over a weighted pc table.

    `conj` maps (j, i, sign) to the full normal form of a_j conjugated
    by a_i^sign.  Pairs without a stored relation commute; the tables
    always hold every noncommuting pair, since the quotient engine
    introduces a tail for each relation it cannot prove.
    """

    def __init__(self, weights, orders, powers, conj, cls, *, budget=10_000_000):
        self.weights = list(weights)
        self.orders = list(orders)
        self.n = len(self.weights)
        self.powers = {i: list(v) for i, v in powers.items()}
        self.conj = {k: list(v) for k, v in conj.items()}
        self.cls = cls
        self.budget = budget
        self.steps = 0

    # -- vectors

    def zero(self) -> List[int]:
        return [0] * self.n

    def unit(self, i: int) -> List[int]:
        v = [0] * self.n
        v[i] = 1
        return v

    def power_value(self, i: int) -> List[int]:
        got = self.powers.get(i)
        return got[:] if got is not None else [0] * self.n

    # -- primitive: normal form of e * a_i^s

    def push(self, e: List[int], i: int, s: int) -> List[int]:
        if s == 0:
            return e
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded("collection step budget exhausted")
        tail = [(j, e[j]) for j in range(i + 1, self.n) if e[j]]
        res = e[:]
        for j, _ in tail:
            res[j] = 0
        a = res[i] + s
        q = 0
        o = self.orders[i]
        if o:
            r = a % o
            q = (a - r) // o
            a = r
        res[i] = a
        if q:
            res = self.mul(res, self.pow(self.power_value(i), q))
        for j, ej in tail:
            res = self.mul(res, self.pow(self.conj_power(j, i, s), ej))
        return res

    def mul(self, u: List[int], v: List[int]) -> List[int]:
        res = u[:]
        for j in range(self.n):
            if v[j]:
                res = self.push(res, j, v[j])
        return res

    def inv(self, u: List[int]) -> List[int]:
        res = self.zero()
        for j in range(self.n - 1, -1, -1):
            if u[j]:
                res = self.push(res, j, -u[j])
        return res

    def pow(self, u: List[int], k: int) -> List[int]:
        if k < 0:
            return self.pow(self.inv(u), -k)
        res = self.zero()
        base = u
        while k:
            if k & 1:
                res = self.mul(res, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return res

    def word_nf(self, letters: Iterable[Tuple[int, int]]) -> List[int]:
        res = self.zero()
        for i, s in letters:
            res = self.push(res, i, s)
        return res

    # -- conjugation

    def conj_power(self, j: int, i: int, s: int) -> List[int]:
        """Normal form of a_j conjugated by a_i^s."""
        if s == 1 or s == -1:
            return self.conj_value(j, i, s)
        half = s // 2
        first = self.conj_power(j, i, half)
        return self.conj_elem(first, i, s - half)

    def conj_elem(self, v: List[int], i: int, s: int) -> List[int]:
        """Normal form of an element v conjugated by a_i^s."""
        if s == 0:
            return v[:]
        res = self.zero()
        for g in range(self.n):
            if v[g]:
                res = self.mul(res, self.pow(self.conj_power(g, i, s), v[g]))
        return res

    def conj_value(self, j: int, i: int, s: int) -> List[int]:
        key = (j, i, s)
        got = self.conj.get(key)
        if got is not None:
            return got[:]
        val = self._conj_compute(j, i, s)
        self.conj[key] = val[:]
        return val

    def _conj_compute(self, j: int, i: int, s: int) -> List[int]:
        if i == j or self.weights[i] + self.weights[j] > self.cls:
            return self.unit(j)
        if s == -1:
            # solve x with x conjugated by a_i equal to a_j: x = a_j * y
            t = self.conj_value(j, i, 1)
            y_img = self.mul(self.inv(t), self.unit(j))
            y = self.conj_elem(y_img, i, -1)
            return self.mul(self.unit(j), y)
        if j < i:
            # flip through the stored orientation of the pair
            z = self.conj_value(i, j, 1)
            comm = self.mul(self.inv(self.unit(i)), z)
            return self.mul(self.unit(j), self.inv(comm))
        # a pair inside the weight bound with no stored relation commutes
        return self.unit(j)


def _collector_for(pc: PcPresentation, *, budget: int = 10_000_000) -> _Collector:
    n = pc.n_gens
    powers = {i: _dense(tail, n) for i, tail in pc.powers}
    conj = {}
    for j, i, tail in pc.conjugations:
        full = _dense(tail, n)
        full[j] += 1
        conj[(j, i, 1)] = full
    return _Collector(pc.weights, pc.orders, powers, conj, pc.nilpotency_class, budget=budget)


def collect(pc: PcPresentation, word: Iterable[Tuple[int, int]]) -> Tuple[int, ...]:
    """Normal form of a word in the pc generators, as an exponent tuple.

    Letters are (generator index, exponent) pairs; exponents may be any
    integer.
    """
    if not pc.consistent:
        raise ValueError("presentation is flagged inconsistent")
    col = _collector_for(pc)
    res = col.zero()
    for i, s in word:
        if not 0 <= i < pc.n_gens:
            raise ValueError(f"generator index {i} out of range")
        res = col.push(res, i, s)
    return tuple(res)


def _epi_letters(pc: PcPresentation, w: GroupWord) -> List[Tuple[int, int]]:
    epi = dict(pc.epimorphism)
    letters: List[Tuple[int, int]] = []
    for name, sign in w:
        if name not in epi:
            raise ValueError(f"letter {name!r} outside the marked generators")
        img = epi[name]
        if sign == 1:
            letters.extend(img)
        else:
            letters.extend((i, -e) for i, e in reversed(img))
    return letters


def pc_wp(pc: PcPresentation, w: GroupWord) -> bool:
    """Does the word over the marked generators die in the quotient?"""
    return not any(collect(pc, _epi_letters(pc, w)))


def consistency_check(pc: PcPresentation) -> List[Tuple]:
    """Overlap tests for unique normal forms; empty list means consistent.

    Runs the standard associativity and power overlaps on every
    applicable generator tuple, using the stored tables regardless of
    the `consistent` flag.
    """
    col = _collector_for(pc)
    n = pc.n_gens
    out: List[Tuple] = []

    def record(kind, idx, left, right):
        if left != right:
            out.append((kind, idx, tuple(left), tuple(right)))

    for k in range(n):
        for j in range(k):
            for i in range(j):
                left = col.mul(col.mul(col.unit(k), col.unit(j)), col.unit(i))
                right = col.mul(col.unit(k), col.mul(col.unit(j), col.unit(i)))
                record("triple", (k, j, i), left, right)
    for j in range(n):
        for i in range(j):
            if pc.orders[i]:
                left = col.mul(col.unit(j), col.power_value(i))
                right = col.mul(col.mul(col.unit(j), col.unit(i)), col.pow(col.unit(i), pc.orders[i] - 1))
                record("power-right", (j, i), left, right)
            if pc.orders[j]:
                left = col.mul(col.power_value(j), col.unit(i))
                right = col.mul(col.pow(col.unit(j), pc.orders[j] - 1), col.mul(col.unit(j), col.unit(i)))
                record("power-left", (j, i), left, right)
    for i in range(n):
        if pc.orders[i]:
            left = col.mul(col.unit(i), col.power_value(i))
            right = col.mul(col.power_value(i), col.unit(i))
            record("power-self", (i,), left, right)
    return out


# ---------------------------------------------------------------------------
# The quotient engine.


class _Work:
    """Mutable per-class state: dense tails indexed by generator."""

    def __init__(self, weights, orders, powers, conj, defs, epi, marking):
        self.weights: List[int] = weights
        self.orders: List[int] = orders
        self.powers: Dict[int, List[int]] = powers
        self.conj: Dict[Tuple[int, int], List[int]] = conj
        self.defs: List[Tuple] = defs
        self.epi: Dict[str, List[int]] = epi
        self.marking: Tuple[str, ...] = marking


def _abelian_reduce(vec: List[int], orders, powers: Dict[int, List[int]], start: int) -> List[int]:
    # valid on a block of pairwise commuting generators whose power
    # tails point strictly rightward
    v = vec[:]
    for i in range(start, len(v)):
        o = orders[i]
        if o and not 0 <= v[i] < o:
            r = v[i] % o
            q = (v[i] - r) // o
            v[i] = r
            tail = powers.get(i)
            if tail:
                for g in range(i + 1, len(v)):
                    if tail[g]:
                        v[g] += q * tail[g]
    return v


def _exponent_rows(gens: Tuple[str, ...], rels: Sequence[GroupWord]) -> List[List[int]]:
    index = {s: k for k, s in enumerate(gens)}
    rows = []
    for w in rels:
        row = [0] * len(gens)
        for name, sign in w:
            row[index[name]] += sign
        rows.append(row)
    return rows


def _class_one(gens: Tuple[str, ...], rels: Sequence[GroupWord]) -> _Work:
    n = len(gens)
    rows = _exponent_rows(gens, rels)
    rows = [r for r in rows if any(r)]
    if rows:
        h, _ = hermite_normal_form(rows)
        pivots = hnf_pivots(h)
    else:
        h, pivots = [], []
    pivot_of: Dict[int, Tuple[int, int]] = {}
    for r, c in pivots:
        pivot_of[c] = (r, h[r][c])
    kept = [c for c in range(n) if pivot_of.get(c, (0, 0))[1] != 1]
    new_idx = {c: k for k, c in enumerate(kept)}
    orders = [0] * len(kept)
    for c in kept:
        if c in pivot_of:
            orders[new_idx[c]] = pivot_of[c][1]

    def row_tail(c: int) -> List[int]:
        # vector over the kept generators with the pivot term removed;
        # reduced Hermite form guarantees eliminated columns are clean
        r = pivot_of[c][0]
        out = [0] * len(kept)
        for q in range(c + 1, n):
            if h[r][q]:
                if q not in new_idx:
                    raise AssertionError("eliminated column referenced by a tail")
                out[new_idx[q]] = -h[r][q]
        return out

    powers: Dict[int, List[int]] = {}
    for c in kept:
        if c in pivot_of:
            powers[new_idx[c]] = [0] * len(kept)
    # normalize tails from the right so later power tails already exist
    for c in sorted((c for c in kept if c in pivot_of), reverse=True):
        powers[new_idx[c]] = _abelian_reduce(row_tail(c), orders, powers, 0)
    epi: Dict[str, List[int]] = {}
    for c in range(n):
        if c in new_idx:
            v = [0] * len(kept)
            v[new_idx[c]] = 1
            epi[gens[c]] = v
        else:
            epi[gens[c]] = _abelian_reduce(row_tail(c), orders, powers, 0)
    defs = [("img", gens[c]) for c in kept]
    return _Work([1] * len(kept), orders, powers, {}, defs, epi, gens)


def _extend(
    work: _Work,
    cls: int,
    rels: Sequence[GroupWord],
    collection_budget: int,
    max_tails: int,
) -> _Work:
    m = len(work.weights)
    defined = set(work.defs)
    tails: List[Tuple] = []
    for s in work.marking:
        if ("img", s) not in defined:
            tails.append(("img", s))
    for j in range(m):
        for i in range(j):
            if work.weights[i] + work.weights[j] > cls:
                continue
            if ("comm", j, i) not in defined:
                tails.append(("comm", j, i))
    for i in range(m):
        if work.orders[i] and ("pow", i) not in defined:
            tails.append(("pow", i))
    if len(tails) > max_tails:
        raise BudgetExceeded(f"tail lattice too large: {len(tails) } tails")
    t_count = len(tails)
    n = m + t_count
    weights = work.weights + [cls] * t_count
    orders = work.orders + [0] * t_count

    def extend(v: List[int]) -> List[int]:
        return v + [0] * t_count

    powers: Dict[int, List[int]] = {i: extend(v) for i, v in work.powers.items()}
    conj: Dict[Tuple[int, int, int], List[int]] = {}
    for (j, i), tail in work.conj.items():
        full = extend(tail)
        full[j] += 1
        conj[(j, i, 1)] = full
    epi = {s: extend(v) for s, v in work.epi.items()}
    for idx, tag in enumerate(tails):
        t = m + idx
        if tag[0] == "comm":
            j, i = tag[1], tag[2]
            full = conj.get((j, i, 1))
            if full is None:
                full = extend([0] * m)
                full[j] = 1
            full[t] = 1
            conj[(j, i, 1)] = full
        elif tag[0] == "pow":
            i = tag[1]
            if i not in powers:
                powers[i] = [0] * n
            powers[i][t] = 1
        else:
            epi[tag[1]][t] = 1

    col = _Collector(weights, orders, powers, conj, cls, budget=collection_budget)

    rows: List[List[int]] = []

    def add_row(left: List[int], right: List[int]) -> None:
        if left[:m] != right[:m]:
            raise AssertionError("overlap mismatch outside the central layer")
        row = [left[m + k] - right[m + k] for k in range(t_count)]
        if any(row):
            rows.append(row)

    for k in range(m):
        for j in range(k):
            for i in range(j):
                if weights[k] + weights[j] + weights[i] > cls:
                    continue
                left = col.mul(col.mul(col.unit(k), col.unit(j)), col.unit(i))
                right = col.mul(col.unit(k), col.mul(col.unit(j), col.unit(i)))
                add_row(left, right)
    for j in range(m):
        for i in range(j):
            if weights[i] + weights[j] > cls:
                continue
            if orders[i]:
                left = col.mul(col.unit(j), col.power_value(i))
                right = col.mul(col.mul(col.unit(j), col.unit(i)), col.pow(col.unit(i), orders[i] - 1))
                add_row(left, right)
            if orders[j]:
                left = col.mul(col.power_value(j), col.unit(i))
                right = col.mul(col.pow(col.unit(j), orders[j] - 1), col.mul(col.unit(j), col.unit(i)))
                add_row(left, right)
    for i in range(m):
        if orders[i]:
            left = col.mul(col.unit(i), col.power_value(i))
            right = col.mul(col.power_value(i), col.unit(i))
            add_row(left, right)
    for w in rels:
        letters: List[Tuple[int, int]] = []
        for name, sign in w:
            img = epi[name]
            pairs = [(g, img[g]) for g in range(n) if img[g]]
            if sign == 1:
                letters.extend(pairs)
            else:
                letters.extend((g, -e) for g, e in reversed(pairs))
        v = col.word_nf(letters)
        if any(v[:m]):
            raise AssertionError("relator image escaped the central layer")
        row = v[m:]
        if any(row):
            rows.append(row)

    if rows:
        h, _ = hermite_normal_form(rows)
        pivots = hnf_pivots(h)
    else:
        h, pivots = [], []
    pivot_of: Dict[int, Tuple[int, int]] = {}
    for r, c in pivots:
        pivot_of[c] = (r, h[r][c])
    survivors = [c for c in range(t_count) if pivot_of.get(c, (0, 0))[1] != 1]
    s_idx = {c: k for k, c in enumerate(survivors)}
    s_count = len(survivors)
    s_orders = [0] * s_count
    for c in survivors:
        if c in pivot_of:
            s_orders[s_idx[c]] = pivot_of[c][1]

    def hnf_tail(c: int) -> List[int]:
        r = pivot_of[c][0]
        out = [0] * s_count
        for q in range(c + 1, t_count):
            if h[r][q]:
                if q not in s_idx:
                    raise AssertionError("eliminated tail referenced by a tail")
                out[s_idx[q]] = -h[r][q]
        return out

    s_powers: Dict[int, List[int]] = {}
    for c in sorted((c for c in survivors if c in pivot_of), reverse=True):
        s_powers[s_idx[c]] = _abelian_reduce(hnf_tail(c), s_orders, s_powers, 0)
    subst: Dict[int, List[int]] = {}
    for c in range(t_count):
        if c not in s_idx:
            subst[c] = _abelian_reduce(hnf_tail(c), s_orders, s_powers, 0)

    n_new = m + s_count

    def map_vec(v: List[int]) -> List[int]:
        out = v[:m] + [0] * s_count
        block = [0] * s_count
        for c in range(t_count):
            e = v[m + c]
            if not e:
                continue
            if c in s_idx:
                block[s_idx[c]] += e
            else:
                expr = subst[c]
                for q in range(s_count):
                    if expr[q]:
                        block[q] += e * expr[q]
        block = _abelian_reduce(block, s_orders, s_powers, 0)
        for q in range(s_count):
            out[m + q] = block[q]
        return out

    new_weights = work.weights + [cls] * s_count
    new_orders = work.orders + s_orders
    new_defs = list(work.defs) + [tails[c] for c in survivors]
    new_powers: Dict[int, List[int]] = {}
    for i, v in powers.items():
        new_powers[i] = map_vec(v)
    for c in survivors:
        if c in pivot_of:
            tail_block = s_powers[s_idx[c]]
            full = [0] * n_new
            for q in range(s_count):
                full[m + q] = tail_block[q]
            new_powers[m + s_idx[c]] = full
    new_conj: Dict[Tuple[int, int], List[int]] = {}
    for (j, i, sign), v in conj.items():
        if sign != 1:
            continue
        mapped = map_vec(v)
        mapped[j] -= 1
        if any(mapped):
            new_conj[(j, i)] = mapped
    new_epi = {s: map_vec(v) for s, v in epi.items()}
    return _Work(new_weights, new_orders, new_powers, new_conj, new_defs, new_epi, work.marking)


def _finish(work: _Work, cls: int) -> PcPresentation:
    powers = tuple((i, _sparse(v)) for i, v in sorted(work.powers.items()) if work.orders[i])
    conjugations = tuple(
        (j, i, _sparse(v)) for (j, i), v in sorted(work.conj.items()) if any(v)
    )
    epi = tuple((s, _sparse(work.epi[s])) for s in work.marking)
    return PcPresentation.make(
        work.weights,
        work.orders,
        powers,
        conjugations,
        work.defs,
        work.marking,
        epi,
        cls,
        True,
    )


def _checked_relators(gens, rels) -> Tuple[Tuple[str, ...], List[GroupWord]]:
    gens = check_alphabet(gens)
    out = []
    for w in rels:
        w = free_reduce(w)
        for name, _ in w:
            if name not in gens:
                raise ValueError(f"relator uses unknown generator {name!r}")
        if w:
            out.append(w)
    return gens, out


def nilpotent_quotient(
    gens,
    rels,
    cls: int,
    *,
    collection_budget: int = 10_000_000,
    max_tails: int = 4096,
) -> PcPresentation:
    """Weighted pc presentation of the class-`cls` quotient of <gens | rels>.

    The quotient is the free group on `gens` by the normal closure of
    `rels` and the (cls+1)-st term of the lower central series.  Raises
    BudgetExceeded instead of ever truncating silently.
    """
    if cls < 1:
        raise ValueError("nilpotency class must be at least 1")
    gens, rels = _checked_relators(gens, rels)
    work = _class_one(gens, rels)
    for c in range(2, cls + 1):
        work = _extend(work, c, rels, collection_budget, max_tails)
    return _finish(work, cls)


def abelianization(gens, rels) -> Tuple[Tuple[int, ...], PcPresentation]:
    """Invariant factors and the class-1 pc presentation of <gens | rels>.

    Factors list torsion entries (each > 1) first, then a 0 per free
    rank, matching the invariant-factor convention of `intlinalg`.
    """
    gens, rels = _checked_relators(gens, rels)
    factors = invariant_factors(_exponent_rows(gens, rels), len(gens))
    return tuple(factors), nilpotent_quotient(gens, rels, 1)


def marked_quotient_nilpotent(src: MarkedPresentation, tgt: MarkedPresentation, cls: int) -> bool:
    """Is tgt, read as a class-`cls` group, a marked quotient of src?

    Both presentations are interpreted in the variety of class-`cls`
    nilpotent groups and generator tuples are matched positionally, so
    the answer is whether every relator of src dies in the quotient
    presented by tgt.
    """
    if not isinstance(src.source, FiniteRelators) or not isinstance(tgt.source, FiniteRelators):
        raise ValueError("marked quotient test needs finite relator lists; enumerate first")
    if len(src.generators) != len(tgt.generators):
        raise ValueError("generator arity mismatch")
    pc = nilpotent_quotient(tgt.generators, tgt.source.words, cls)
    rename = dict(zip(src.generators, tgt.generators))
    for w in src.source.words:
        moved = tuple((rename[name], sign) for name, sign in w)
        if not pc_wp(pc, moved):
            return False
    return True


def layer_ranks(pc: PcPresentation) -> Tuple[int, ...]:
    """Torsion-free rank of each weight layer, classes 1..nilpotency_class."""
    out = [0] * pc.nilpotency_class
    for w, o in zip(pc.weights, pc.orders):
        if o == 0:
            out[w - 1] += 1
    return tuple(out)


def hirsch_length(pc: PcPresentation) -> int:
    return sum(1 for o in pc.orders if o == 0)
