"""Allocation/reservation lane rules, slot selection strategies, degradation."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import Insufficient, LaneConflict, NoReservation
from .platform import ALLOCATION, RESERVATION, SlotTable
from .workload import PASSIVE, TaskInstance


class SlotStrategy(str, Enum):
    RANDOM = "random"
    FREE_FIRST = "free_first"
    FREE_LAST = "free_last"


@dataclass(frozen=True)
class SlotRequest:
    requester: TaskInstance
    lane: str
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("slot request count must be >= 1")
        if self.lane not in (ALLOCATION, RESERVATION):
            raise ValueError(f"unknown lane {self.lane!r}")
        if self.lane == RESERVATION and not (self.requester.critical and self.requester.kind == PASSIVE):
            raise ValueError("only passive instances of critical apps reserve slots")

    @property
    def critical(self) -> bool:
        return self.requester.critical


def candidate_slots(table: SlotTable, ecu: int, request: SlotRequest):
    """Return ``(free, overlap_eligible)`` slot indices on ``ecu``, ascending.

    Critical allocations may only use completely free slots. Reservations may
    additionally sit on slots allocated by non-critical tasks; non-critical
    allocations may sit on slots that are reserved but not allocated.
    """
    free = sorted(table.free[ecu])
    if request.lane == RESERVATION:
        overlap = sorted(table.nc_open[ecu])
    elif request.critical:
        overlap = []
    else:
        overlap = sorted(table.resv_open[ecu])
    return free, overlap


def pool_sizes(table: SlotTable, ecu: int, request: SlotRequest):
    """``(len(free), len(overlap_eligible))`` without building the lists."""
    nfree = len(table.free[ecu])
    if request.lane == RESERVATION:
        return nfree, len(table.nc_open[ecu])
    if request.critical:
        return nfree, 0
    return nfree, len(table.resv_open[ecu])


def select_slots(free, overlap, count, strategy, rng=None):
    """Pick ``count`` slots from the two pools according to ``strategy``."""
    strategy = SlotStrategy(strategy)
    free, overlap = sorted(free), sorted(overlap)
    if len(free) + len(overlap) < count:
        raise Insufficient(f"need {count} slots, only {len(free) + len(overlap)} eligible")
    if strategy is SlotStrategy.FREE_FIRST:
        chosen = (free + overlap)[:count]
    elif strategy is SlotStrategy.FREE_LAST:
        chosen = (overlap + free)[:count]
    else:
        if rng is None:
            raise ValueError("random strategy needs an rng")
        chosen = rng.sample(sorted(free + overlap), count)
    return sorted(chosen)


def commit(table: SlotTable, ecu: int, request: SlotRequest, chosen) -> SlotTable:
    """Write ``request.requester`` into its lane on each chosen slot."""
    lane = table.lane(request.lane)[ecu]
    for s in chosen:
        if lane[s] is not None:
            raise LaneConflict(f"e{ecu} slot {s}: {request.lane} lane held by {lane[s]}")
        if request.lane == ALLOCATION:
            other = table.resv[ecu][s]
            if other is not None and request.critical:
                raise LaneConflict(f"e{ecu} slot {s}: critical allocation on reserved slot")
        else:
            other = table.alloc[ecu][s]
            if other is not None and other.critical:
                raise LaneConflict(f"e{ecu} slot {s}: reservation on critical allocation")
    for s in chosen:
        table.assign(ecu, s, request.lane, request.requester)
    return table


def degrade(table: SlotTable, activated_passive: TaskInstance) -> set:
    """Turn the passive instance's reservations into allocations.

    Non-critical tasks allocated on those slots are shut down: they lose every
    slot they hold, here and on other ECUs. Returns the set of victims.
    Calling it again for an already activated instance is a no-op.
    """
    reserved = table.held(activated_passive, RESERVATION)
    if not reserved:
        if table.held(activated_passive, ALLOCATION):
            return set()
        raise NoReservation(f"{activated_passive} holds no reservations")
    victims = set()
    for e, s in reserved:
        occupant = table.alloc[e][s]
        if occupant is not None and not occupant.critical:
            victims.add(occupant)
    for v in sorted(victims):
        table.release(v, ALLOCATION)
    for e, s in reserved:
        table.clear(e, s, RESERVATION)
        table.assign(e, s, ALLOCATION, activated_passive)
    return victims
