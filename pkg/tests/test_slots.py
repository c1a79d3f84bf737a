import random

import pytest
from hypothesis import given, settings, strategies as st

from degradelab.errors import Insufficient, LaneConflict, NoReservation
from degradelab.platform import ALLOCATION, RESERVATION, SlotTable
from degradelab.slots import (SlotRequest, SlotStrategy, candidate_slots, commit, degrade,
                              select_slots)
from degradelab.workload import TaskInstance

NC = TaskInstance(1, 0, "active", False)
NC2 = TaskInstance(2, 0, "active", False)
CRIT = TaskInstance(0, 0, "active", True)
PAS = TaskInstance(0, 0, "passive", True)
PAS2 = TaskInstance(0, 1, "passive", True)


def test_allocated_slot_is_overlap_eligible_for_reservation():
    t = SlotTable([3])
    t.assign(0, 0, ALLOCATION, NC)
    free, overlap = candidate_slots(t, 0, SlotRequest(PAS, RESERVATION, 1))
    assert overlap == [0] and free == [1, 2]


def test_empty_table():
    t = SlotTable([4])
    for req in (SlotRequest(NC, ALLOCATION, 1), SlotRequest(CRIT, ALLOCATION, 1),
                SlotRequest(PAS, RESERVATION, 1)):
        assert candidate_slots(t, 0, req) == ([0, 1, 2, 3], [])


def test_saturated_table():
    t = SlotTable([2])
    for s in range(2):
        t.assign(0, s, ALLOCATION, NC)
        t.assign(0, s, RESERVATION, PAS)
    assert candidate_slots(t, 0, SlotRequest(NC2, ALLOCATION, 1)) == ([], [])


def test_lane_rules():
    t = SlotTable([3])
    t.assign(0, 0, RESERVATION, PAS)
    t.assign(0, 1, ALLOCATION, CRIT)
    # critical allocations only see free slots
    assert candidate_slots(t, 0, SlotRequest(CRIT, ALLOCATION, 1)) == ([2], [])
    # non-critical allocations may sit on reserved slots
    assert candidate_slots(t, 0, SlotRequest(NC, ALLOCATION, 1)) == ([2], [0])
    # reservations never share a slot with a critical allocation
    assert candidate_slots(t, 0, SlotRequest(PAS2, RESERVATION, 1)) == ([2], [])


def test_only_critical_passives_reserve():
    with pytest.raises(ValueError):
        SlotRequest(NC, RESERVATION, 1)
    with pytest.raises(ValueError):
        SlotRequest(CRIT, RESERVATION, 1)


@pytest.mark.parametrize("strategy, expected", [("free_first", [1, 2]), ("free_last", [0, 1])])
def test_selection_rules(strategy, expected):
    assert select_slots([1, 2], [0], 2, strategy) == expected


@pytest.mark.parametrize("strategy", list(SlotStrategy))
def test_forced_selection(strategy):
    assert select_slots([1, 2], [0], 3, strategy, random.Random(0)) == [0, 1, 2]


def test_insufficient():
    with pytest.raises(Insufficient):
        select_slots([1], [], 2, "free_first")


def test_commit_guards():
    t = SlotTable([2])
    t.assign(0, 0, ALLOCATION, CRIT)
    with pytest.raises(LaneConflict):
        commit(t, 0, SlotRequest(PAS, RESERVATION, 1), [0])
    t.assign(0, 1, RESERVATION, PAS)
    with pytest.raises(LaneConflict):
        commit(t, 0, SlotRequest(TaskInstance(0, 1, "active", True), ALLOCATION, 1), [1])


def test_degrade_shuts_down_occupant():
    t = SlotTable([2, 2])
    t.assign(0, 0, ALLOCATION, NC)
    t.assign(1, 1, ALLOCATION, NC)  # the victim's other slot elsewhere
    t.assign(0, 0, RESERVATION, PAS)
    assert degrade(t, PAS) == {NC}
    assert t.alloc[0][0] == PAS and t.resv[0][0] is None
    assert t.held(NC) == []


def test_degrade_on_free_reservation():
    t = SlotTable([2])
    t.assign(0, 1, RESERVATION, PAS)
    assert degrade(t, PAS) == set()
    assert t.alloc[0][1] == PAS
    # second activation is a no-op
    assert degrade(t, PAS) == set()


def test_degrade_two_victims():
    t = SlotTable([2])
    t.assign(0, 0, ALLOCATION, NC)
    t.assign(0, 1, ALLOCATION, NC2)
    t.assign(0, 0, RESERVATION, PAS)
    t.assign(0, 1, RESERVATION, PAS)
    assert degrade(t, PAS) == {NC, NC2}


def test_degrade_without_reservation():
    with pytest.raises(NoReservation):
        degrade(SlotTable([1]), PAS)


_OWNERS = [NC, NC2, CRIT, PAS, PAS2]


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(1, 3), st.sampled_from(list(SlotStrategy))),
                max_size=12), st.integers(0, 10))
def test_lane_invariants_hold_under_random_requests(ops, seed):
    rng = random.Random(seed)
    t = SlotTable([6, 6])
    for who, count, strategy in ops:
        owner = _OWNERS[who]
        lane = RESERVATION if owner.kind == "passive" else ALLOCATION
        req = SlotRequest(owner, lane, count)
        e = rng.randrange(2)
        free, overlap = candidate_slots(t, e, req)
        try:
            chosen = select_slots(free, overlap, count, strategy, rng)
        except Insufficient:
            continue
        commit(t, e, req, chosen)
    for e in range(2):
        for s in range(6):
            a, r = t.alloc[e][s], t.resv[e][s]
            if a is not None and r is not None:
                assert not a.critical
            assert (s in t.free[e]) == (a is None and r is None)
            assert (s in t.nc_open[e]) == (a is not None and not a.critical and r is None)
            assert (s in t.resv_open[e]) == (r is not None and a is None)
