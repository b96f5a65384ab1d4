import pytest

from lgroup.intlinalg import invariant_factors
from lgroup.lsystems import Edt0lSystem
from lgroup.presentations import (
    FiniteRelators,
    LPresentation,
    MarkedPresentation,
    amalgam_gadget,
    change_generators,
    edt0l_to_lpresentation,
    enumerated,
    lpresentation_to_dtf0l_fin,
    relators,
    tietze_eliminate,
)
from lgroup.words import (
    GroupEndomorphism,
    MonoidMorphism,
    free_reduce,
    invert,
    parse_group_word,
)


def gw(text):
    return parse_group_word(text)


def grigorchuk_lpres():
    gens = ("a", "c", "d")
    sigma = GroupEndomorphism.make(
        gens, {"a": gw("a c a"), "c": gw("c d"), "d": gw("c")}
    )
    return MarkedPresentation.make(
        gens,
        LPresentation.make(
            gens,
            [],
            [("sigma", sigma)],
            [gw("a a"), gw("a d a d a d a d"), (gw("a d a c a c") * 4)],
        ),
    )


def even_powers_system():
    # relator language {a^(2n) : n >= 1} plus the dropped empty word
    alphabet = ("a", "a_inv", "N")
    return Edt0lSystem.make(
        ("a", "a_inv"),
        ("N",),
        ("N",),
        [
            (
                "grow",
                MonoidMorphism.make(
                    alphabet, alphabet, {"a": ("a",), "a_inv": ("a_inv",), "N": ("N", "a", "a")}
                ),
            ),
            (
                "kill",
                MonoidMorphism.make(
                    alphabet, alphabet, {"a": ("a",), "a_inv": ("a_inv",), "N": ()}
                ),
            ),
        ],
    )


def skew_system():
    # substitutions that do not respect formal inverses on purpose
    alphabet = ("a", "a_inv", "N")
    return Edt0lSystem.make(
        ("a", "a_inv"),
        ("N",),
        ("N",),
        [
            (
                "wrap",
                MonoidMorphism.make(
                    alphabet,
                    alphabet,
                    {"a": ("a",), "a_inv": ("a", "a"), "N": ("a_inv", "N", "a")},
                ),
            ),
            (
                "kill",
                MonoidMorphism.make(
                    alphabet, alphabet, {"a": ("a",), "a_inv": ("a_inv",), "N": ()}
                ),
            ),
        ],
    )


def test_relators_finite_source():
    p = MarkedPresentation.finite(("a", "b"), [gw("b a b^-1 a^-1"), gw("a a")])
    assert relators(p, 5, 32) == [gw("a a"), gw("b a b^-1 a^-1")]


def test_relators_iterated_presentation_contains_substituted_word():
    p = grigorchuk_lpres()
    rels0 = relators(p, 0, 64)
    assert gw("a a") in rels0
    rels1 = relators(p, 1, 64)
    # image of a^2 after one substitution: (aca)^2
    assert gw("a c a a c a") in rels1
    assert gw("a c a a c a") not in rels0


def test_relators_edt0l_source_decodes_group_words():
    p = MarkedPresentation.make(("a",), even_powers_system())
    rels = relators(p, 3, 32)
    assert gw("a a") in rels
    assert gw("a a a a") in rels
    assert () not in rels
    assert all(len(w) % 2 == 0 for w in rels)


def test_marked_presentation_validates_terminals():
    with pytest.raises(ValueError):
        MarkedPresentation.make(("a", "b"), even_powers_system())


def eliminate_promoted(conv, finite_p):
    lp = conv.source
    p = finite_p
    for rel in lp.once:
        gen = rel[0][0]
        defining = invert(rel[1:])
        p = tietze_eliminate(p, gen, defining)
    return p


@pytest.mark.parametrize("make_sys", [even_powers_system, skew_system])
def test_round_trip_through_iterated_presentation(make_sys):
    sys = make_sys()
    p = MarkedPresentation.make(("a",), sys)
    conv = edt0l_to_lpresentation(p)
    assert isinstance(conv.source, LPresentation)
    for d in range(4):
        back_small = eliminate_promoted(conv, enumerated(conv, d, 10**6))
        back_big = eliminate_promoted(conv, enumerated(conv, d + 2, 10**6))
        orig_small = set(relators(p, d, 10**6))
        orig_big = set(relators(p, d + 2, 10**6))
        assert set(back_small.source.words) <= orig_big
        assert orig_small <= set(back_big.source.words)
        assert back_small.generators == p.generators


def test_round_trip_skew_system_distinguishes_monoid_action():
    # wrap(N) = a^-1 N a kills to nothing, but wrap^2(N) = a a a^-1 N a a
    # kills to a^3 because wrap sends the formal inverse letter to a a
    sys = skew_system()
    p = MarkedPresentation.make(("a",), sys)
    rels = set(relators(p, 3, 32))
    assert gw("a a a") in rels
    assert gw("a a a a a a") in set(relators(p, 4, 32))


def test_tietze_eliminate_substitutes():
    p = MarkedPresentation.finite(("a", "x"), [gw("x a^-1 a^-1"), gw("x x x")])
    out = tietze_eliminate(p, "x", gw("a a"))
    assert out.generators == ("a",)
    assert out.source.words == (gw("a a a a a a"),)


def test_tietze_eliminate_errors():
    p = MarkedPresentation.finite(("a", "x"), [gw("x a^-1 a^-1")])
    with pytest.raises(ValueError):
        tietze_eliminate(p, "y", gw("a"))
    with pytest.raises(ValueError):
        tietze_eliminate(p, "x", gw("x a"))
    with pytest.raises(ValueError):
        tietze_eliminate(p, "x", gw("a a a"))
    live = MarkedPresentation.make(("a",), even_powers_system())
    with pytest.raises(ValueError):
        tietze_eliminate(live, "a", gw("eps"))


def test_tietze_accepts_reversed_orientation():
    p = MarkedPresentation.finite(("a", "x"), [gw("a a x^-1")])
    out = tietze_eliminate(p, "x", gw("a a"))
    assert out.source.words == ()


def test_change_generators_identity_remark():
    p = MarkedPresentation.finite(("a", "b"), [gw("a b a^-1 b^-1")])
    out = change_generators(
        p,
        [("a", gw("a")), ("b", gw("b"))],
        {"a": gw("a"), "b": gw("b")},
    )
    assert out.generators == ("a", "b")
    assert out.source.words == (gw("a b a^-1 b^-1"),)


def test_change_generators_rename_free_group():
    p = MarkedPresentation.finite(("a",), [])
    out = change_generators(p, [("b", gw("a"))], {"a": gw("b")})
    assert out.generators == ("b",)
    assert out.source.words == ()


def exponent_matrix(p):
    rows = []
    for w in p.source.words:
        row = [0] * len(p.generators)
        for name, sign in w:
            row[p.generators.index(name)] += sign
        rows.append(row)
    return rows


def test_change_generators_preserves_abelianization():
    p = MarkedPresentation.finite(("a", "b"), [gw("b b b"), gw("a b a^-1 b^-1")])
    out = change_generators(
        p,
        [("c", gw("a b")), ("d", gw("b"))],
        {"a": gw("c d^-1"), "b": gw("d")},
    )
    old = invariant_factors(exponent_matrix(p), len(p.generators))
    new = invariant_factors(exponent_matrix(out), len(out.generators))
    assert old == new == [3, 0]


def test_change_generators_rejects_bad_witnesses():
    p = MarkedPresentation.finite(("a", "b"), [gw("a a")])
    with pytest.raises(ValueError):
        change_generators(p, [("c", gw("a b"))], {"a": gw("c")})
    with pytest.raises(ValueError):
        change_generators(p, [("c", gw("a z"))], {"a": gw("c"), "b": gw("c")})


def empty_word_system():
    return Edt0lSystem.make(
        ("s", "s_inv"),
        (),
        (),
        [("id", MonoidMorphism.identity(("s", "s_inv")))],
    )


def singleton_system():
    return Edt0lSystem.make(
        ("s", "s_inv"),
        (),
        ("s",),
        [("id", MonoidMorphism.identity(("s", "s_inv")))],
    )


def test_amalgam_gadget_empty_word():
    out = amalgam_gadget(empty_word_system())
    assert out.generators == ("s", "s_hat", "a", "b")
    assert relators(out, 2, 32) == [gw("a b")]


def test_amalgam_gadget_singleton():
    out = amalgam_gadget(singleton_system())
    assert relators(out, 2, 32) == [gw("s a s s_hat b s_hat")]


def hat_shape_ok(word, gens):
    # word must read w a w w^ b w^ with w over the unhatted generators
    try:
        i = word.index(("a", 1))
    except ValueError:
        return False
    w = word[:i]
    if any(name.endswith("_hat") or name in ("a", "b") for name, _ in w):
        return False
    hatted = tuple((f"{name}_hat", sign) for name, sign in w)
    want = w + (("a", 1),) + w + hatted + (("b", 1),) + hatted
    return word == want


def test_amalgam_gadget_relator_shape():
    sys = even_powers_system()
    # rename the relator alphabet to s to keep gadget names clash-free
    ren = {"a": "s", "a_inv": "s_inv", "N": "N"}
    alphabet = ("s", "s_inv", "N")
    rows = [
        (
            name,
            MonoidMorphism.make(
                alphabet,
                alphabet,
                {ren[x]: tuple(ren[y] for y in m.image_map[x]) for x in sys.alphabet},
            ),
        )
        for name, m in sys.morphisms
    ]
    renamed = Edt0lSystem.make(("s", "s_inv"), ("N",), ("N",), rows)
    out = amalgam_gadget(renamed)
    rels = relators(out, 4, 64)
    assert rels
    for w in rels:
        assert hat_shape_ok(w, out.generators)


def test_amalgam_gadget_name_errors():
    with pytest.raises(ValueError):
        amalgam_gadget(
            Edt0lSystem.make(
                ("a", "a_inv"), (), ("a",), [("id", MonoidMorphism.identity(("a", "a_inv")))]
            )
        )


def test_lpres_to_system_identity_endo():
    gens = ("a", "b")
    lp = LPresentation.make(
        gens, [], [("id", GroupEndomorphism.identity(gens))], [gw("a b a^-1 b^-1")]
    )
    p = MarkedPresentation.make(gens, lp)
    conv = lpresentation_to_dtf0l_fin(p)
    assert isinstance(conv.source, Edt0lSystem)
    for d in range(3):
        assert relators(conv, d + 1, 32) == relators(p, d, 32)


def test_lpres_to_system_grigorchuk_matches_direct_iteration():
    p = grigorchuk_lpres()
    conv = lpresentation_to_dtf0l_fin(p)
    for d in range(4):
        assert relators(conv, d + 1, 10**6) == relators(p, d, 10**6)


def test_lpres_to_system_once_words_at_depth_one():
    gens = ("a",)
    lp = LPresentation.make(
        gens, [gw("a a a")], [("id", GroupEndomorphism.identity(gens))], [gw("a a")]
    )
    p = MarkedPresentation.make(gens, lp)
    conv = lpresentation_to_dtf0l_fin(p)
    assert gw("a a a") in relators(conv, 1, 32)
