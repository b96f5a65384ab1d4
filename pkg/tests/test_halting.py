import random

import pytest

from lgroup.fixtures import four_step_halter, halting_machines
from lgroup.hall import HallElement, central_f_coordinates, central_word, hall_from_word
from lgroup.halting import (
    CentralWord,
    Halted,
    MachineList,
    NontrivialUpToBudget,
    Running,
    Trivial,
    TuringMachine,
    active_relations,
    gamma_probe,
    h_center_wp,
    h_wp,
    odd_prime,
    run_tm,
)
from lgroup.words import free_reduce, invert, left_normed_commutator, parse_group_word


def gw(text):
    return parse_group_word(text)


def rand_word(rng, max_len):
    raw = [(rng.choice("ab"), rng.choice((1, -1))) for _ in range(rng.randrange(max_len + 1))]
    return free_reduce(raw)


def instant_halter():
    return TuringMachine.make(1, 0, 0, ())


def looper():
    return TuringMachine.make(
        2, 0, 1,
        ((0, "blank", 0, "blank", "R"), (0, "0", 0, "0", "R"), (0, "1", 0, "1", "R")),
    )


# -- machines ------------------------------------------------------------------


def test_machine_validation():
    with pytest.raises(ValueError, match="at least one state"):
        TuringMachine.make(0, 0, 0, ())
    with pytest.raises(ValueError, match="out of range"):
        TuringMachine.make(2, 0, 5, ())
    with pytest.raises(ValueError, match="halt state has an outgoing"):
        TuringMachine.make(
            2, 0, 1,
            (
                (0, "blank", 0, "blank", "R"),
                (0, "0", 0, "0", "R"),
                (0, "1", 0, "1", "R"),
                (1, "blank", 0, "blank", "R"),
            ),
        )
    with pytest.raises(ValueError, match="unknown tape symbol"):
        TuringMachine.make(2, 0, 1, ((0, "2", 0, "0", "R"),))
    with pytest.raises(ValueError, match="move"):
        TuringMachine.make(2, 0, 1, ((0, "blank", 0, "blank", "U"),))
    with pytest.raises(ValueError, match="duplicate rule"):
        TuringMachine.make(
            2, 0, 1,
            ((0, "blank", 0, "blank", "R"), (0, "blank", 0, "0", "L")),
        )
    with pytest.raises(ValueError, match="total"):
        TuringMachine.make(2, 0, 1, ((0, "blank", 1, "1", "R"),))


def test_run_instant_halter():
    assert run_tm(instant_halter(), 0) == Halted(0)
    assert run_tm(instant_halter(), 100) == Halted(0)


def test_run_fixture_machines():
    assert run_tm(four_step_halter(), 4) == Halted(4)
    assert run_tm(four_step_halter(), 3) == Running()
    assert run_tm(four_step_halter(), 1000) == Halted(4)
    ms = halting_machines()
    assert run_tm(ms.machine(1), 2) == Halted(2)
    assert run_tm(ms.machine(1), 1) == Running()
    assert run_tm(ms.machine(2), 0) == Running()
    assert run_tm(ms.machine(2), 2000) == Running()


def test_run_rejects_negative_budget():
    with pytest.raises(ValueError, match="budget"):
        run_tm(instant_halter(), -1)


def test_left_edge_stays():
    # one non-halt state that writes and pushes left forever: the head
    # must stay pinned at the edge rather than fall off the tape
    m = TuringMachine.make(
        2, 0, 1,
        ((0, "blank", 0, "1", "L"), (0, "0", 0, "0", "L"), (0, "1", 0, "1", "L")),
    )
    assert run_tm(m, 50) == Running()


def test_machine_list_indexing():
    ms = halting_machines()
    assert ms.machine(1) == ms.machines[0]
    with pytest.raises(ValueError, match="no machine"):
        ms.machine(0)
    with pytest.raises(ValueError, match="no machine"):
        ms.machine(3)


def test_odd_primes():
    assert [odd_prime(n) for n in range(1, 8)] == [3, 5, 7, 11, 13, 17, 19]
    with pytest.raises(ValueError):
        odd_prime(0)


# -- active relations -----------------------------------------------------------


def test_active_relations_fixture():
    ms = halting_machines()
    assert active_relations(ms, 2) == ()
    assert active_relations(ms, 8) == ()
    assert active_relations(ms, 9) == ((3, 9),)
    assert active_relations(ms, 100) == ((3, 9),)


def test_active_relations_all_loopers():
    ms = MachineList.make((looper(), looper()))
    assert active_relations(ms, 1000) == ()


def test_active_relations_instant_halt_identifies_with_one():
    # a 0-step halt gives p^0 = 1: the relation reaches down to index 1
    ms = MachineList.make((instant_halter(),))
    assert active_relations(ms, 3) == ((3, 1),)
    assert active_relations(ms, 2) == ()


def test_active_relations_monotone():
    ms = halting_machines()
    rng = random.Random(50)
    for _ in range(10):
        n = rng.randrange(0, 40)
        small = set(active_relations(ms, n))
        assert small <= set(active_relations(ms, n + 5))


def test_active_relations_rejects_negative():
    with pytest.raises(ValueError):
        active_relations(halting_machines(), -1)


# -- central word problem ---------------------------------------------------------


def test_central_word_validation():
    with pytest.raises(ValueError, match="positive"):
        CentralWord.make({0: 1})
    assert CentralWord.make({2: 0, 1: 3}).exps == ((1, 3),)


def test_center_wp_basic():
    ms = halting_machines()
    assert h_center_wp(CentralWord.make({}), ms)
    assert h_center_wp(CentralWord.make({3: 1, 9: -1}), ms)
    assert h_center_wp(CentralWord.make({3: 2, 9: -2}), ms)
    assert not h_center_wp(CentralWord.make({3: 1, 9: 1}), ms)
    assert not h_center_wp(CentralWord.make({5: 1, 25: -1}), ms)
    assert not h_center_wp(CentralWord.make({1: 1}), ms)
    assert not h_center_wp(CentralWord.make({3: 1}), ms)


def test_center_wp_without_halts_is_freeness():
    ms = MachineList.make((looper(), looper()))
    assert not h_center_wp(CentralWord.make({3: 1, 9: -1}), ms)
    assert h_center_wp(CentralWord.make({}), ms)


def test_center_wp_instant_halt_reaches_index_one():
    ms = MachineList.make((instant_halter(),))
    assert h_center_wp(CentralWord.make({1: 1, 3: -1}), ms)
    assert not h_center_wp(CentralWord.make({1: 1, 3: -1}), MachineList.make((looper(),)))


def test_center_wp_horizon_stability():
    ms = halting_machines()
    rng = random.Random(51)
    for _ in range(30):
        exps = {rng.randrange(1, 13): rng.randrange(-3, 4) for _ in range(rng.randrange(1, 5))}
        w = CentralWord.make(exps)
        base = h_center_wp(w, ms)
        if w.exps:
            top = max(j for j, _ in w.exps)
            assert h_center_wp(w, ms, horizon=top + 5) == base
            with pytest.raises(ValueError, match="horizon"):
                h_center_wp(w, ms, horizon=top - 1)


# -- word problem over the generators ---------------------------------------------


def test_h_wp_trivial_and_noncentral():
    ms = halting_machines()
    assert h_wp((), ms)
    assert not h_wp(gw("a"), ms)
    assert not h_wp(gw("b"), ms)
    assert not h_wp(gw("a^-1 b a b^-1"), ms)
    assert not h_wp(left_normed_commutator([gw("b"), gw("a"), gw("b")]), ms)


def test_h_wp_active_pair():
    ms = halting_machines()
    assert h_wp(central_word({3: 1, 9: -1}), ms)
    assert not h_wp(central_word({5: 1, 25: -1}), ms)
    assert not h_wp(central_word({3: 1, 9: -1}), MachineList.make((looper(), looper())))


def test_h_wp_is_congruence():
    ms = halting_machines()
    rng = random.Random(52)
    dead = central_word({3: 2, 9: -2})
    for _ in range(30):
        u = rand_word(rng, 6)
        v = free_reduce(u + dead)
        w = rand_word(rng, 6)
        assert h_wp(free_reduce(u + invert(v)), ms)
        assert h_wp(free_reduce(w + u + invert(v) + invert(w)), ms)


def test_h_wp_matches_plain_group_without_halts():
    ms = MachineList.make(())
    rng = random.Random(53)
    for _ in range(300):
        w = rand_word(rng, 10)
        assert h_wp(w, ms) == (hall_from_word(w) == HallElement.identity())


def test_h_wp_untouched_support_matches_plain_group():
    # the fixture's only identification is 3 ~ 9, so words whose central
    # support avoids both indices are decided exactly as in the base group
    ms = halting_machines()
    rng = random.Random(54)
    for _ in range(40):
        exps = {k: rng.randrange(-2, 3) for k in (1, 2, 4)}
        w = central_word(exps)
        expected = all(v == 0 for v in exps.values())
        assert h_wp(w, ms) == expected


# -- the probe ---------------------------------------------------------------------


def test_probe_shallow_is_trivial():
    ms = halting_machines()
    for k in range(1, 6):
        assert gamma_probe(1, k, ms, 0) == Trivial()
    for k in range(1, 8):
        assert gamma_probe(2, k, ms, 0) == Trivial()


def test_probe_sees_the_halt():
    ms = halting_machines()
    for k in range(6, 12):
        assert gamma_probe(1, k, ms, 10) == Trivial()
        # without enough budget the halt is invisible
        assert gamma_probe(1, k, ms, 1) == NontrivialUpToBudget()
    assert gamma_probe(1, 12, ms, 10) == NontrivialUpToBudget()


def test_probe_looper_never_resolves():
    ms = halting_machines()
    for budget in (0, 10, 10_000):
        assert gamma_probe(2, 8, ms, budget) == NontrivialUpToBudget()
        assert gamma_probe(2, 100, ms, budget) == NontrivialUpToBudget()


def test_probe_budget_monotone():
    ms = halting_machines()
    rng = random.Random(55)
    for _ in range(20):
        idx = rng.choice((1, 2))
        k = rng.randrange(1, 15)
        small = rng.randrange(0, 4)
        if gamma_probe(idx, k, ms, small) == Trivial():
            assert gamma_probe(idx, k, ms, small + 7) == Trivial()


def test_probe_one_step_halt_adds_nothing():
    # halting in one step identifies the marker with itself, so depth
    # p + 3 is still out of reach
    one_step = TuringMachine.make(
        2, 0, 1,
        ((0, "blank", 1, "1", "R"), (0, "0", 1, "0", "R"), (0, "1", 1, "1", "R")),
    )
    ms = MachineList.make((one_step,))
    assert run_tm(one_step, 5) == Halted(1)
    assert gamma_probe(1, 5, ms, 10) == Trivial()
    assert gamma_probe(1, 6, ms, 10) == NontrivialUpToBudget()


def test_probe_validation():
    ms = halting_machines()
    with pytest.raises(ValueError):
        gamma_probe(0, 4, ms, 10)
    with pytest.raises(ValueError):
        gamma_probe(3, 4, ms, 10)
    with pytest.raises(ValueError):
        gamma_probe(1, 0, ms, 10)
    with pytest.raises(ValueError):
        gamma_probe(1, 4, ms, -2)


# -- the word builder behind the pipeline tests -------------------------------------


def test_central_word_round_trip():
    rng = random.Random(56)
    for _ in range(20):
        exps = {rng.randrange(1, 9): rng.randrange(-9, 10) for _ in range(rng.randrange(1, 4))}
        w = central_word(exps)
        x = hall_from_word(w)
        assert x.is_central
        got = central_f_coordinates(x)
        top = max((k for k, v in exps.items() if v), default=0)
        assert got == tuple(exps.get(k, 0) for k in range(1, top + 1))


def test_central_word_validation():
    with pytest.raises(ValueError, match="positive"):
        central_word({0: 1})
    assert central_word({}) == ()
    assert central_word({4: 0}) == ()
