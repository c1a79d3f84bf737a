import itertools

import pytest
from hypothesis import given, settings, strategies as st

from degradelab.errors import ConfigError, DisconnectedTopology, DuplicateId, LaneConflict
from degradelab.platform import (ALLOCATION, RESERVATION, Ecu, Switch, SlotTable, build_topology,
                                 ecu, reference_platform, parse_node, shortest_route, switch,
                                 topology_from_config, total_capacity)
from degradelab.workload import TaskInstance

from helpers import four_ecu_topology


def test_reference_platform_capacity():
    topo = reference_platform()
    assert len(topo.ecus) == 10 and len(topo.switches) == 2
    assert total_capacity(topo) == 1750


def test_singleton_topology():
    topo = build_topology([Ecu(0, 1)])
    assert total_capacity(topo) == 1


def test_capacity_sum():
    topo = build_topology([Ecu(0, 5), Ecu(1, 7), Ecu(2, 11)], [], [("e0", "e1"), ("e1", "e2")])
    assert total_capacity(topo) == 23


def test_disconnected():
    with pytest.raises(DisconnectedTopology):
        build_topology([Ecu(0, 1), Ecu(1, 1)])


def test_duplicate_ids():
    with pytest.raises(DuplicateId):
        build_topology([Ecu(0, 1), Ecu(0, 1)])


def test_undeclared_endpoint():
    with pytest.raises(ConfigError):
        build_topology([Ecu(0, 1)], [], [("e0", "s4")])


def test_bad_ecu_fields():
    with pytest.raises(ConfigError):
        Ecu(0, 0)
    with pytest.raises(ConfigError):
        Ecu(0, 3, failure_rate=0)


def test_parse_node():
    assert parse_node("e3") == ecu(3)
    assert str(switch(1)) == "s1"
    with pytest.raises(ConfigError):
        parse_node("x1")


def test_route_through_switch():
    topo = four_ecu_topology()
    route = shortest_route(topo, 0, 1)
    walk = [ecu(0)]
    for link in route:
        walk.append(link.other(walk[-1]))
    assert [str(n) for n in walk] == ["e0", "s0", "e1"]


def test_route_same_node_is_empty():
    assert shortest_route(four_ecu_topology(), 2, 2) == []


def test_tie_break_prefers_lower_switch():
    topo = build_topology([Ecu(0, 1), Ecu(1, 1)], [Switch(0), Switch(1)],
                          [("e0", "s1"), ("s1", "e1"), ("e0", "s0"), ("s0", "e1")])
    route = shortest_route(topo, 0, 1)
    assert len(route) == 2
    assert switch(0) in (route[0].a, route[0].b)


def _simple_paths(topo, src, dst):
    """All simple node paths by exhaustive DFS."""
    out = []

    def go(node, path):
        if node == dst:
            out.append(path)
            return
        for nxt, _ in topo.neighbours(node):
            if nxt not in path:
                go(nxt, path + [nxt])

    go(src, [src])
    return out


def test_chain_route_matches_brute_force():
    topo = build_topology([Ecu(0, 1), Ecu(1, 1), Ecu(2, 1), Ecu(3, 1)], [Switch(0), Switch(1)],
                          [("e0", "s0"), ("s0", "s1"), ("s1", "e3"), ("e1", "s0"), ("e2", "s1")])
    route = shortest_route(topo, 0, 3)
    best = min(len(p) - 1 for p in _simple_paths(topo, ecu(0), ecu(3)))
    assert len(route) == best == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.data())
def test_routes_are_shortest_on_random_graphs(n, data):
    extra = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=8))
    links = [(f"e{i}", f"e{i + 1}") for i in range(n - 1)]
    links += [(f"e{a}", f"e{b}") for a, b in extra if a != b]
    topo = build_topology([Ecu(i, 1) for i in range(n)], [], links)
    for a, b in itertools.permutations(range(n), 2):
        route = shortest_route(topo, a, b)
        assert len(route) == min(len(p) - 1 for p in _simple_paths(topo, ecu(a), ecu(b)))
        # consecutive links share a node and the walk ends at the destination
        node = ecu(a)
        for link in route:
            node = link.other(node)
        assert node == ecu(b)


def test_topology_from_config_variants():
    assert total_capacity(topology_from_config({"preset": "paper_10x175"})) == 1750
    topo = topology_from_config({"ecus": {"count": 3, "slot_capacity": [5, 7, 11]},
                                 "switches": {"count": 1}})
    assert total_capacity(topo) == 23
    topo = topology_from_config({"ecus": {"count": 2, "slot_capacity": 4},
                                 "links": [["e0", "e1"]]})
    assert len(topo.links) == 1
    with pytest.raises(ConfigError):
        topology_from_config({"preset": "nope"})


def _inst(app, task, kind="active", critical=False):
    return TaskInstance(app, task, kind, critical)


def test_slot_table_lanes_and_release():
    t = SlotTable([4, 4])
    nc = _inst(1, 0)
    pas = _inst(0, 0, "passive", True)
    t.assign(0, 0, ALLOCATION, nc)
    t.assign(0, 0, RESERVATION, pas)
    assert t.occupied() == 1 and t.overlap_count() == 1
    with pytest.raises(LaneConflict):
        t.assign(0, 0, ALLOCATION, _inst(2, 0))
    assert t.held(nc) == [(0, 0)]
    t.release(nc)
    assert t.alloc[0][0] is None and t.resv[0][0] == pas
    assert t.lane_count(RESERVATION) == 1


def test_slot_table_copy_is_independent():
    t = SlotTable([2])
    c = t.copy()
    c.assign(0, 1, ALLOCATION, _inst(0, 0))
    assert t.occupied() == 0 and c.occupied() == 1
