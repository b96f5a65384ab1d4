import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lgroup import formats as F
from lgroup.automata import ControlLanguage, letter_tracking_dfa
from lgroup.cfg import Cfg
from lgroup.fixtures import cyclic_group, halting_machines, lamplighter_edt0l
from lgroup.formats import FormatError
from lgroup.hall import pi1_edt0l, pi2_edt0l, truncated_presentation
from lgroup.lsystems import (
    ControlledEdt0l,
    Dt0lSystem,
    Dtf0lSystem,
    edt0l_to_hdt0l,
)
from lgroup.nilpotent import PcPresentation, nilpotent_quotient
from lgroup.presentations import (
    MarkedPresentation,
    edt0l_to_lpresentation,
    lpresentation_to_dtf0l_fin,
)
from lgroup.quotients import FiniteGroup
from lgroup.words import MonoidMorphism, free_reduce, parse_group_word


def round_trip(value, write, parse):
    text = write(value)
    back = parse(text)
    assert back == value
    assert write(back) == text
    return text


# ---------------------------------------------------------------------------
# words


def test_format_word_basics():
    assert F.format_word(()) == "eps"
    assert F.format_word(("a", "b_inv")) == "a b^-1"
    assert F.format_group_word(()) == "eps"
    assert F.format_group_word((("a", 1), ("b", -1))) == "a b^-1"


def test_empty_word_needs_the_eps_spelling():
    with pytest.raises(FormatError):
        F.format_word((), declared=("a", "eps"))
    with pytest.raises(FormatError):
        F.format_group_word((), declared=("eps",))


def test_declared_eps_renders_as_a_letter():
    assert F.format_word(("eps", "eps"), declared=("a", "eps")) == "eps eps"


@given(
    st.lists(
        st.tuples(st.sampled_from(("a", "b")), st.sampled_from((1, -1))), max_size=12
    ).map(free_reduce)
)
def test_group_word_round_trip(w):
    text = F.format_group_word(w)
    assert parse_group_word(text, alphabet=("a", "b")) == w


# ---------------------------------------------------------------------------
# automata


def test_dfa_round_trip():
    ctrl = letter_tracking_dfa(pi2_edt0l().source)
    text = round_trip(ctrl.dfa, F.write_dfa, F.parse_dfa)
    assert text.splitlines()[0] == "[dfa]"
    assert "alphabet = init_a init_b deepen emit" in text


def test_dfa_parse_reports_lines():
    with pytest.raises(FormatError, match="line 3: .*integer"):
        F.parse_dfa("[dfa]\nalphabet = x\nstates = many\ninitial = 0\naccepting =\n")
    with pytest.raises(FormatError, match="line 5: transition symbol 'y'"):
        F.parse_dfa(
            "[dfa]\nalphabet = x\nstates = 1\ninitial = 0\ntrans 0 y 0\naccepting = 0\n"
        )
    with pytest.raises(FormatError, match="line 1: missing required line"):
        F.parse_dfa("[dfa]\nstates = 1\ninitial = 0\naccepting =\n")


def test_dfa_comments_and_blanks_keep_line_numbers():
    text = "# control automaton\n\n[dfa]\nalphabet = x\nstates = 1\ninitial = 2\naccepting =\ntrans 0 x 0\n"
    with pytest.raises(FormatError, match="line 3: initial state 2 out of range"):
        F.parse_dfa(text)


def test_wrong_header_is_rejected():
    with pytest.raises(FormatError, match="line 1: expected header"):
        F.parse_dfa("[cfg]\nstart = S\n")
    with pytest.raises(FormatError, match="line 1: empty input"):
        F.parse_dfa("# nothing here\n")


# ---------------------------------------------------------------------------
# systems


def doubling_dt0l():
    dbl = MonoidMorphism.make(("a",), ("a",), {"a": ("a", "a")})
    return Dt0lSystem.make(("a",), ("a",), (("dbl", dbl),))


def test_dt0l_round_trip():
    text = round_trip(doubling_dt0l(), F.write_system, F.parse_system)
    assert "map dbl { a -> a a }" in text


def test_identity_images_are_omitted_and_refilled():
    sys = pi2_edt0l().source
    text = round_trip(sys, F.write_system, F.parse_system)
    # deepen fixes the terminals, so its map line only mentions the core pair
    line = next(l for l in text.splitlines() if l.startswith("map deepen"))
    assert "a ->" not in line and "b ->" not in line


def test_edt0l_and_hdt0l_round_trips():
    sys = lamplighter_edt0l().source
    round_trip(sys, F.write_system, F.parse_system)
    round_trip(edt0l_to_hdt0l(sys), F.write_system, F.parse_system)


def test_dtf0l_round_trip_with_declared_eps_letter():
    lp = edt0l_to_lpresentation(lamplighter_edt0l())
    sys = lpresentation_to_dtf0l_fin(lp).source
    round_trip(sys, F.write_system, F.parse_system)


def test_empty_map_block_parses():
    text = "[dt0l]\nterminals = a\nseed = a\nmap same { }\n"
    sys = F.parse_system(text)
    assert sys.morphisms[0][1]("a") == ("a",)
    assert F.write_system(sys) == text


def test_controlled_system_reads_its_automaton_file(tmp_path):
    inner = pi2_edt0l().source
    ctrl = letter_tracking_dfa(inner)
    sys = ControlledEdt0l.make(inner, ctrl)
    (tmp_path / "ctrl.dfa").write_text(F.write_dfa(ctrl.dfa), encoding="utf-8")
    text = F.write_system(sys, control_ref="ctrl.dfa")
    back = F.parse_system(text, base_dir=str(tmp_path))
    assert back == sys
    assert F.write_system(back, control_ref="ctrl.dfa") == text


def test_controlled_system_without_reference_is_an_error():
    inner = pi2_edt0l().source
    sys = ControlledEdt0l.make(inner, letter_tracking_dfa(inner))
    with pytest.raises(ValueError, match="control file reference"):
        F.write_system(sys)


def test_missing_control_file_reports_the_line(tmp_path):
    text = (
        "[cedt0l]\nterminals = a\nnonterminals = S\nseed = S\n"
        "map emit { S -> a }\ncontrol = gone.dfa\n"
    )
    with pytest.raises(FormatError, match="line 6: cannot read control file"):
        F.parse_system(text, base_dir=str(tmp_path))


def test_system_errors_carry_line_numbers():
    with pytest.raises(FormatError, match="line 4: .*outside the declared alphabet"):
        F.parse_system("[dt0l]\nterminals = a\nseed = a\nmap m { a -> b }\n")
    with pytest.raises(FormatError, match="line 4: unexpected key 'sede'"):
        F.parse_system("[dt0l]\nterminals = a\nseed = a\nsede = a\nmap m { }\n")
    with pytest.raises(FormatError, match="line 1: missing required line `seed"):
        F.parse_system("[dt0l]\nterminals = a\nmap m { }\n")
    with pytest.raises(FormatError, match="line 4: .*no final map"):
        F.parse_system("[dt0l]\nterminals = a\nseed = a\nfinal { }\n")
    with pytest.raises(FormatError, match="line 1: a \\[hdt0l\\] block needs a final"):
        F.parse_system("[hdt0l]\nterminals = a\nnonterminals = S\nseed = S\n")
    with pytest.raises(FormatError, match="line 3: duplicate key"):
        F.parse_system("[dt0l]\nterminals = a # once\nterminals = a\nseed = a\n")
    with pytest.raises(FormatError, match="line 4: duplicate map entry"):
        F.parse_system("[dt0l]\nterminals = a\nseed = a\nmap m { a -> a a ; a -> a }\n")


def test_seed_expands_exponents():
    sys = F.parse_system("[dt0l]\nterminals = a\nseed = a^3\nmap m { }\n")
    assert sys.seed == ("a", "a", "a")


# ---------------------------------------------------------------------------
# grammars


def anbn_cfg():
    return Cfg.make(("a", "b"), ("S",), "S", (("S", ("a", "S", "b")), ("S", ())))


def test_cfg_round_trip():
    text = round_trip(anbn_cfg(), F.write_cfg, F.parse_cfg)
    assert "rule S -> a S b" in text
    assert "rule S ->" in text.splitlines()[-1]


def test_cfg_symbols_are_literal():
    g = F.parse_cfg("[cfg]\nstart = S\nrule S -> eps S eps\nrule S ->\n")
    assert g.terminals == ("eps",)
    with pytest.raises(FormatError, match="line 3: .*no exponents"):
        F.parse_cfg("[cfg]\nstart = S\nrule S -> a^2\n")


def test_cfg_start_without_rules_is_the_empty_grammar():
    g = F.parse_cfg("[cfg]\nstart = S\n")
    assert g.nonterminals == ("S",) and g.rules == ()


def test_cfg_rule_needs_an_arrow():
    with pytest.raises(FormatError, match="line 2: rule lines read"):
        F.parse_cfg("[cfg]\nrule S a\nstart = S\n")


# ---------------------------------------------------------------------------
# presentations


def test_finite_presentation_round_trip():
    text = round_trip(
        truncated_presentation(4), F.write_presentation, F.parse_presentation
    )
    assert "source = finite" in text
    assert text.count("\nrelator b^-1 a^-1") == 2


def test_system_presentation_round_trips():
    for p in (lamplighter_edt0l(), pi2_edt0l(), pi1_edt0l()):
        text = round_trip(p, F.write_presentation, F.parse_presentation)
        assert "source = edt0l" in text
    h = MarkedPresentation.make(
        ("a", "b"), edt0l_to_hdt0l(pi2_edt0l().source)
    )
    text = round_trip(h, F.write_presentation, F.parse_presentation)
    assert "source = hdt0l" in text


def test_iterated_presentation_round_trip():
    lp = edt0l_to_lpresentation(lamplighter_edt0l())
    text = round_trip(lp, F.write_presentation, F.parse_presentation)
    assert "source = lpres" in text
    assert any(line.startswith("endo shift_r") for line in text.splitlines())


def test_presentation_source_statement_mismatches():
    with pytest.raises(FormatError, match="line 4: statement not allowed"):
        F.parse_presentation(
            "[presentation]\ngenerators = a\nsource = finite\nendo f { }\n"
        )
    with pytest.raises(FormatError, match="line 4: statement not allowed"):
        F.parse_presentation(
            "[presentation]\ngenerators = a\nsource = lpres\nrelator a\n"
        )
    with pytest.raises(FormatError, match="line 3: unknown source"):
        F.parse_presentation("[presentation]\ngenerators = a\nsource = magic\n")
    with pytest.raises(FormatError, match="needs an embedded system block"):
        F.parse_presentation("[presentation]\ngenerators = a\nsource = edt0l\n")
    with pytest.raises(FormatError, match="line 4: embedded block must be \\[edt0l\\]"):
        F.parse_presentation(
            "[presentation]\ngenerators = a\nsource = edt0l\n[dt0l]\nterminals = a\nseed = a\n"
        )


def test_relator_outside_generators_reports_its_line():
    with pytest.raises(FormatError, match="line 5"):
        F.parse_presentation(
            "[presentation]\ngenerators = a b\nsource = finite\nrelator a b\nrelator a c\n"
        )


# ---------------------------------------------------------------------------
# polycyclic presentations


def quotient_fixtures():
    comm = parse_group_word("a b a^-1 b^-1")
    return (
        nilpotent_quotient(("a", "b"), [], 2),
        nilpotent_quotient(("a", "b"), [comm], 3),
        nilpotent_quotient(("a", "eps"), [parse_group_word("eps eps", ("a", "eps"))], 1),
    )


def test_pc_round_trips():
    for pc in quotient_fixtures():
        round_trip(pc, F.write_pc, F.parse_pc)


def test_pc_text_shape():
    pc = nilpotent_quotient(("a", "b"), [], 2)
    text = F.write_pc(pc)
    lines = text.splitlines()
    assert lines[0] == "[pc]"
    assert lines[1] == "class = 2"
    assert "conj 2 1 : g3" in lines
    assert "def 3 : [2,1]" in lines
    assert lines[-1] == "epi b : g2"


def test_pc_power_definition_round_trip():
    pc = PcPresentation.make(
        (1, 2),
        (2, 2),
        ((0, ((1, 1),)), (1, ())),
        (),
        (("img", "a"), ("pow", 0)),
        ("a",),
        (("a", ((0, 1),)),),
        2,
    )
    text = round_trip(pc, F.write_pc, F.parse_pc)
    assert "def 2 : pow 1" in text
    assert "pow 2 : eps" in text


def test_pc_parse_errors():
    good = F.write_pc(nilpotent_quotient(("a",), [], 1))
    assert F.parse_pc(good).marking == ("a",)
    with pytest.raises(FormatError, match="line 1: missing required line `class"):
        F.parse_pc("[pc]\ngen 1 weight 1 order 0\ndef 1 : img a\nepi a : g1\n")
    with pytest.raises(FormatError, match="line 3: generator lines read"):
        F.parse_pc("[pc]\nclass = 1\ngen 1 weight 1\ndef 1 : img a\nepi a : g1\n")
    with pytest.raises(FormatError, match="line 1: missing definitions for generators 1"):
        F.parse_pc("[pc]\nclass = 1\ngen 1 weight 1 order 0\nepi a : g1\n")
    with pytest.raises(FormatError, match="line 4: generator 'g2' out of range"):
        F.parse_pc(
            "[pc]\nclass = 1\ngen 1 weight 1 order 0\npow 1 : g2\n"
            "def 1 : img a\nepi a : g1\n"
        )
    with pytest.raises(FormatError, match="pc words use generators"):
        F.parse_pc(
            "[pc]\nclass = 1\ngen 1 weight 1 order 0\ndef 1 : img a\nepi a : x1\n"
        )


# ---------------------------------------------------------------------------
# finite groups


def test_group_table_round_trip():
    for g in (cyclic_group(2), cyclic_group(3), cyclic_group(6)):
        text = round_trip(g, F.write_finite_group, F.parse_finite_group)
        assert text.splitlines()[1] == f"order = {g.order}"


def test_group_permutation_variant():
    g = F.parse_finite_group("[group]\ndegree = 3\nperm 1 0 2\nperm 1 2 0\n")
    assert g.order == 6
    assert g == FiniteGroup.from_permutations(3, ((1, 0, 2), (1, 2, 0)))
    # writing always canonicalizes to the table variant
    assert "order = 6" in F.write_finite_group(g)


def test_group_parse_errors():
    with pytest.raises(FormatError, match="either `order = n` or `degree = d`"):
        F.parse_finite_group("[group]\norder = 2\ndegree = 2\nrow 0 : 0 1\nrow 1 : 1 0\n")
    with pytest.raises(FormatError, match="line 1: missing rows 1"):
        F.parse_finite_group("[group]\norder = 2\nrow 0 : 0 1\n")
    with pytest.raises(FormatError, match="line 3: bad or duplicate row index"):
        F.parse_finite_group("[group]\norder = 1\nrow 3 : 0\n")
    with pytest.raises(FormatError, match="line 3: expected integers"):
        F.parse_finite_group("[group]\norder = 1\nrow 0 : e\n")
    # a latin square with identity and two-sided inverses, but no associativity
    loop = (
        "[group]\norder = 5\n"
        "row 0 : 0 1 2 3 4\n"
        "row 1 : 1 0 3 4 2\n"
        "row 2 : 2 4 0 1 3\n"
        "row 3 : 3 2 4 0 1\n"
        "row 4 : 4 3 1 2 0\n"
    )
    with pytest.raises(FormatError, match="not associative"):
        F.parse_finite_group(loop)


# ---------------------------------------------------------------------------
# machine lists


def test_machine_list_round_trip():
    ms = halting_machines()
    text = round_trip(ms, F.write_machines, F.parse_machines)
    assert text.count("[tm]") == len(ms.machines)
    assert "rule 0 blank -> 1 1 R" in text


def test_machine_parse_errors():
    with pytest.raises(FormatError, match="line 1: expected a \\[tm\\] block header"):
        F.parse_machines("states = 1\n")
    with pytest.raises(FormatError, match="line 5: rule lines read"):
        F.parse_machines("[tm]\nstates = 1\nstart = 0\nhalt = 0\nrule 0 blank -> 0\n")
    with pytest.raises(FormatError, match="line 1: .*unknown tape symbol"):
        F.parse_machines(
            "[tm]\nstates = 2\nstart = 0\nhalt = 1\n"
            "rule 0 zero -> 1 1 R\nrule 0 blank -> 1 1 R\nrule 0 1 -> 1 1 R\n"
        )


def test_machine_blocks_split_on_headers():
    one = "[tm]\nstates = 1\nstart = 0\nhalt = 0\n"
    ms = F.parse_machines(one + "\n" + one)
    assert len(ms.machines) == 2
