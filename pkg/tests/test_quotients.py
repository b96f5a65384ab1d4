"""Quotient drivers: finite groups, orbit stabilization, quotient tests."""

import random

import pytest

from lgroup.fixtures import cyclic_group, empty_language_edt0l, lamplighter_edt0l
from lgroup.lsystems import Hdt0lSystem, edt0l_to_hdt0l
from lgroup.nilpotent import (
    BudgetExceeded,
    abelianization,
    hirsch_length,
    layer_ranks,
    marked_quotient_nilpotent,
    nilpotent_quotient,
    pc_wp,
)
from lgroup.presentations import MarkedPresentation, relators
from lgroup.quotients import (
    FiniteGroup,
    FiniteTarget,
    NilpotentClass,
    edt0l_nilpotent_quotient,
    finite_quotient_test,
    marked_quotient_edt0l_nilpotent,
    stabilize_nonterminals,
)
from lgroup.words import (
    GroupEndomorphism,
    MonoidMorphism,
    commutator,
    group_to_monoid,
    inverse_closure,
    left_normed_commutator,
    parse_group_word,
)


def gw(text, alphabet=None):
    return parse_group_word(text, alphabet=alphabet)


def group_word_system(positive, seed_text, images):
    """HDT0L system encoding group endomorphisms of the free group on
    `positive`, with an identity finishing morphism."""
    inner = inverse_closure(positive)

    def endo(table):
        full = {s: ((s, 1),) for s in positive}
        full.update(table)
        return GroupEndomorphism.make(positive, full).as_monoid_morphism()

    rows = tuple((name, endo(table)) for name, table in images)
    seed = group_to_monoid(gw(seed_text, alphabet=positive))
    return Hdt0lSystem.make(inner, seed, rows, MonoidMorphism.identity(inner))


# ---------------------------------------------------------------- FiniteGroup

KLEIN_TABLE = [
    [0, 1, 2, 3],
    [1, 0, 3, 2],
    [2, 3, 0, 1],
    [3, 2, 1, 0],
]

# Latin square with identity and two-sided inverses that fails
# associativity: (1*1)*2 = 2 while 1*(1*2) = 1*3 = 4.
NONASSOC_TABLE = [
    [0, 1, 2, 3, 4],
    [1, 0, 3, 4, 2],
    [2, 4, 0, 1, 3],
    [3, 2, 4, 0, 1],
    [4, 3, 1, 2, 0],
]


def test_finite_group_make_klein_four():
    h = FiniteGroup.make(KLEIN_TABLE)
    assert h.order == 4
    assert h.identity == 0
    assert h.inverses == (0, 1, 2, 3)
    assert h.mul(1, 2) == 3 and h.inv(3) == 3


def test_finite_group_make_rejects_bad_tables():
    with pytest.raises(ValueError):
        FiniteGroup.make([])
    with pytest.raises(ValueError):
        FiniteGroup.make([[0, 1], [1]])
    with pytest.raises(ValueError):
        FiniteGroup.make([[0, 2], [1, 0]])
    with pytest.raises(ValueError):
        FiniteGroup.make([[0, 0], [0, 0]])
    with pytest.raises(ValueError, match="associative"):
        FiniteGroup.make(NONASSOC_TABLE)


def test_finite_group_from_permutations_symmetric():
    h = FiniteGroup.from_permutations(3, [(1, 0, 2), (0, 2, 1)])
    assert h.order == 6
    assert h.identity == 0
    # nonabelian: some pair fails to commute
    assert any(
        h.mul(x, y) != h.mul(y, x) for x in range(6) for y in range(6)
    )
    orders = set()
    for x in range(h.order):
        k, acc = 1, x
        while acc != h.identity:
            acc = h.mul(acc, x)
            k += 1
        orders.add(k)
    assert orders == {1, 2, 3}


def test_finite_group_from_permutations_rejects_non_bijection():
    with pytest.raises(ValueError):
        FiniteGroup.from_permutations(3, [(0, 0, 1)])


def test_cyclic_group_fixture():
    z6 = cyclic_group(6)
    assert z6.order == 6
    assert z6.identity == 0
    assert z6.inv(1) == 5
    with pytest.raises(ValueError):
        cyclic_group(0)


def test_finite_target_validates_range():
    z2 = cyclic_group(2)
    t = FiniteTarget.make(z2, {"a": 1})
    assert t.assignment == (("a", 1),)
    with pytest.raises(ValueError):
        FiniteTarget.make(z2, {"a": 2})


# ------------------------------------------------------------- stabilization


def test_stabilize_identity_morphism_is_immediate():
    sys = group_word_system(("a",), "a a", [("id", {})])
    assert stabilize_nonterminals(sys, NilpotentClass(1), 5) == 0


def test_stabilize_lamplighter_needs_one_round():
    h = edt0l_to_hdt0l(lamplighter_edt0l().source)
    assert stabilize_nonterminals(h, NilpotentClass(1), 8) == 1


def test_stabilize_weight_raising_depth_tracks_class():
    # the substitution rewrites c to [c,a] inside a fixed commutator
    # shape, so each round raises the relator weight by one and the
    # orbit stabilizes once fresh relators exceed the class
    def sys():
        return group_word_system(
            ("a", "b", "c"),
            "c^-1 b^-1 c b a^-1 b^-1 c^-1 b c a",
            [("raise", {"c": commutator(gw("c"), gw("a"))})],
        )

    for cls, depth in ((2, 0), (3, 0), (4, 1), (5, 2)):
        assert stabilize_nonterminals(sys(), NilpotentClass(cls), 8) == depth


def test_stabilize_verify_extra_matches_plain_run():
    h = edt0l_to_hdt0l(lamplighter_edt0l().source)
    plain = stabilize_nonterminals(h, NilpotentClass(1), 8, verify_extra=False)
    checked = stabilize_nonterminals(h, NilpotentClass(1), 8, verify_extra=True)
    assert plain == checked == 1


def test_stabilize_budget_exhaustion():
    h = edt0l_to_hdt0l(lamplighter_edt0l().source)
    with pytest.raises(BudgetExceeded):
        stabilize_nonterminals(h, NilpotentClass(1), 0)


def test_stabilize_input_validation():
    sys = group_word_system(("a",), "a a", [("id", {})])
    with pytest.raises(ValueError):
        stabilize_nonterminals(sys, NilpotentClass(0), 3)
    with pytest.raises(ValueError):
        stabilize_nonterminals(sys, cyclic_group(2), 3)
    with pytest.raises(ValueError):
        stabilize_nonterminals(sys, NilpotentClass(1), -1)


def test_stabilize_rejects_non_group_encodings():
    inner = ("a", "a_inv")
    bad = MonoidMorphism.make(inner, inner, {"a": ("a", "a"), "a_inv": ("a_inv",)})
    sys = Hdt0lSystem.make(inner, ("a",), (("m", bad),), MonoidMorphism.identity(inner))
    with pytest.raises(ValueError, match="respect"):
        stabilize_nonterminals(sys, NilpotentClass(1), 3)
    lop = ("a", "b_inv")
    sys2 = Hdt0lSystem.make(
        lop, ("a",), (("id", MonoidMorphism.identity(lop)),), MonoidMorphism.identity(lop)
    )
    with pytest.raises(ValueError, match="inverse closed"):
        stabilize_nonterminals(sys2, NilpotentClass(1), 3)


# --------------------------------------------------- nilpotent quotients of systems


def test_lamplighter_class_one_quotient():
    p = lamplighter_edt0l()
    sq = edt0l_nilpotent_quotient(p, 1)
    assert sq.depth == 1
    assert [list(w) for w in sq.presentation.source.words] == [[("eps", 1), ("eps", 1)]]
    factors, _ = abelianization(("a", "eps"), sq.presentation.source.words)
    assert factors == (2, 0)
    assert sorted(sq.pc.orders) == [0, 2]
    assert pc_wp(sq.pc, gw("eps eps", alphabet=("a", "eps")))
    assert not pc_wp(sq.pc, gw("eps", alphabet=("a", "eps")))
    assert not pc_wp(sq.pc, gw("a", alphabet=("a", "eps")))


def test_empty_language_quotient_is_free():
    p = empty_language_edt0l()
    sq = edt0l_nilpotent_quotient(p, 2)
    assert sq.depth == 0
    assert sq.presentation.source.words == ()
    assert hirsch_length(sq.pc) == 3
    assert layer_ranks(sq.pc) == (2, 1)
    free = nilpotent_quotient(("a", "b"), [], 2)
    assert marked_quotient_nilpotent(sq.presentation, MarkedPresentation.finite(("a", "b"), []), 2)
    assert free == sq.pc


def test_quotient_accepts_hdt0l_sources():
    inner = inverse_closure(("a", "eps"))
    sys = Hdt0lSystem.make(
        inner,
        ("eps", "eps"),
        (("id", MonoidMorphism.identity(inner)),),
        MonoidMorphism.identity(inner),
    )
    p = MarkedPresentation.make(("a", "eps"), sys)
    sq = edt0l_nilpotent_quotient(p, 1)
    assert sq.depth == 0
    assert sorted(sq.pc.orders) == [0, 2]


def test_quotient_rejects_finite_relator_sources():
    p = MarkedPresentation.finite(("a",), [gw("a a")])
    with pytest.raises(ValueError, match="word system"):
        edt0l_nilpotent_quotient(p, 1)


# ------------------------------------------------------------ marked quotients


def test_marked_quotient_against_own_stabilization():
    p = lamplighter_edt0l()
    sq = edt0l_nilpotent_quotient(p, 1)
    assert marked_quotient_edt0l_nilpotent(p, sq.presentation, 1)

    q = empty_language_edt0l()
    sq2 = edt0l_nilpotent_quotient(q, 2)
    assert marked_quotient_edt0l_nilpotent(q, sq2.presentation, 2)


def test_marked_quotient_direction_sensitivity():
    p = lamplighter_edt0l()
    free2 = MarkedPresentation.finite(("a", "b"), [])
    # the torsion relator cannot die in a torsion-free target
    assert not marked_quotient_edt0l_nilpotent(p, free2, 1)
    # but the free group maps onto the lamplighter quotient
    sq = edt0l_nilpotent_quotient(p, 1)
    assert marked_quotient_edt0l_nilpotent(empty_language_edt0l(), sq.presentation, 1)


# ---------------------------------------------------------- finite quotients


def test_finite_quotient_all_to_identity():
    s3 = FiniteGroup.from_permutations(3, [(1, 0, 2), (0, 2, 1)])
    assert finite_quotient_test(lamplighter_edt0l(), s3, {"a": 0, "eps": 0})
    assert finite_quotient_test(empty_language_edt0l(), s3, {"a": 0, "b": 0})


def test_finite_quotient_lamplighter_mod_two_and_three():
    p = lamplighter_edt0l()
    assert finite_quotient_test(p, cyclic_group(2), {"eps": 1, "a": 0})
    assert finite_quotient_test(p, cyclic_group(2), {"eps": 1, "a": 1})
    assert not finite_quotient_test(p, cyclic_group(3), {"eps": 1, "a": 0})
    assert not finite_quotient_test(p, cyclic_group(3), {"eps": 2, "a": 1})
    # killing the lamp leaves only the free shift
    assert finite_quotient_test(p, cyclic_group(3), {"eps": 0, "a": 1})


def test_finite_quotient_empty_language_accepts_everything():
    s3 = FiniteGroup.from_permutations(3, [(1, 0, 2), (0, 2, 1)])
    for a in range(6):
        for b in range(6):
            assert finite_quotient_test(empty_language_edt0l(), s3, {"a": a, "b": b})


def test_finite_quotient_input_validation():
    p = lamplighter_edt0l()
    z2 = cyclic_group(2)
    with pytest.raises(ValueError):
        finite_quotient_test(p, z2, {"eps": 1})
    with pytest.raises(ValueError):
        finite_quotient_test(p, z2, {"eps": 1, "a": 0, "c": 0})
    with pytest.raises(ValueError):
        finite_quotient_test(p, z2, {"eps": 2, "a": 0})


def _evaluate(h, assignment, word):
    acc = h.identity
    for name, sign in word:
        v = assignment[name]
        if sign < 0:
            v = h.inv(v)
        acc = h.mul(acc, v)
    return acc


def test_finite_quotient_agrees_with_bounded_brute_force():
    s3 = FiniteGroup.from_permutations(3, [(1, 0, 2), (0, 2, 1)])
    targets = [cyclic_group(2), cyclic_group(3), s3]
    for p in (lamplighter_edt0l(), empty_language_edt0l()):
        rels = relators(p, 6, 48)
        for h in targets:
            for x in range(h.order):
                for y in range(h.order):
                    f_map = {p.generators[0]: x, p.generators[1]: y}
                    brute = all(
                        _evaluate(h, f_map, w) == h.identity for w in rels
                    )
                    assert finite_quotient_test(p, h, f_map) == brute


# -------------------------------------------------------------- residual axioms


def test_lower_central_words_die_in_every_quotient_of_that_class():
    # a weight-(c+1) commutator is trivial in any class-c quotient, and
    # stays so after an arbitrary endomorphism
    rng = random.Random(11)
    lamp = edt0l_nilpotent_quotient(lamplighter_edt0l(), 1).pc
    quotients = {
        1: [nilpotent_quotient(("a", "b"), [], 1), lamp],
        2: [nilpotent_quotient(("a", "b"), [], 2)],
        3: [nilpotent_quotient(("a", "b"), [gw("b a b a^-1")], 3)],
    }

    def random_word():
        out = []
        for _ in range(rng.randint(1, 2)):
            out.append((rng.choice(("a", "b")), rng.choice((1, -1))))
        return tuple(out)

    for cls, pcs in quotients.items():
        for _ in range(12):
            deep = left_normed_commutator([random_word() for _ in range(cls + 1)])
            phi = GroupEndomorphism.make(
                ("a", "b"), {"a": random_word(), "b": random_word()}
            )
            for pc in pcs:
                for w in (deep, phi(deep)):
                    renamed = tuple((pc.marking[0 if n == "a" else 1], s) for n, s in w)
                    assert pc_wp(pc, renamed)
