"""Small hand-built scenarios and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools

from degradelab.mapping import RedundancyMode, map_fixed
from degradelab.platform import Ecu, Switch, build_topology
from degradelab.workload import CRITICAL, NON_CRITICAL, Application, Task


def four_ecu_topology(capacity=4):
    """e0,e1 on s0; e2,e3 on s2; s0-s1-s2 chain."""
    ecus = [Ecu(i, capacity) for i in range(4)]
    switches = [Switch(i) for i in range(3)]
    links = [("e0", "s0"), ("e1", "s0"), ("s0", "s1"), ("s1", "s2"), ("e2", "s2"), ("e3", "s2")]
    return build_topology(ecus, switches, links)


def two_task_app(app_id, critical, demand=1):
    return Application(app_id, CRITICAL if critical else NON_CRITICAL,
                       (Task(0, demand), Task(1, demand)), ((0, 1),))


def coupled_system():
    """Critical app 0 and non-critical app 1, each two single-slot tasks.

    Critical actives sit on e1 (task 0) and e0 (task 1); their passives
    reserve the very slots the non-critical tasks allocate on e2 and e3.
    """
    apps = [two_task_app(0, True), two_task_app(1, False)]
    placements = {
        1: {"alpha": [2, 3], "alpha_slots": [[0], [0]]},
        0: {"alpha": [1, 0], "beta": [2, 3], "alpha_slots": [[0], [0]],
            "beta_slots": [[0], [0]]},
    }
    return map_fixed(apps, four_ecu_topology(), placements,
                     RedundancyMode.GRACEFUL_DEGRADATION)


def shared_active_system():
    """Critical app with both actives on e1 and passives on e0 and e2."""
    apps = [two_task_app(0, True)]
    placements = {0: {"alpha": [1, 1], "beta": [0, 2]}}
    return map_fixed(apps, four_ecu_topology(), placements,
                     RedundancyMode.GRACEFUL_DEGRADATION)


def truth_probability(fn, n, r):
    """Sum of P(assignment) over satisfying assignments of ``fn``."""
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        if fn(bits):
            p = 1.0
            for b, ri in zip(bits, r):
                p *= ri if b else 1 - ri
            total += p
    return total


def distinct_subfunctions(fn, n):
    """Decision-node count of the reduced OBDD, from first principles.

    Level ``i`` holds one node per distinct subfunction obtained by fixing
    variables ``0..i-1`` that still depends on variable ``i``.
    """
    count = 0
    for i in range(n):
        seen = set()
        for prefix in itertools.product((0, 1), repeat=i):
            table = tuple(fn(prefix + rest) for rest in itertools.product((0, 1), repeat=n - i))
            half = len(table) // 2
            if table[:half] != table[half:]:
                seen.add(table)
        count += len(seen)
    return count
