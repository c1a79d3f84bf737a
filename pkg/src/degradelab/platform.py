"""Hardware model: ECUs, switches, links, shortest-path routing and slot tables."""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import ConfigError, DisconnectedTopology, DuplicateId, LaneConflict, NoRoute

REFERENCE_PRESET = "paper_10x175"
DEFAULT_FAILURE_RATE = 0.01


class Node(NamedTuple):
    kind: str  # "ecu" or "switch"
    id: int

    def __str__(self):
        return f"{self.kind[0]}{self.id}"


def ecu(i: int) -> Node:
    return Node("ecu", i)


def switch(i: int) -> Node:
    return Node("switch", i)


_NODE_RE = re.compile(r"^([es])(\d+)$")


def parse_node(text) -> Node:
    """Parse ``"e3"`` / ``"s0"`` into a :class:`Node`."""
    if isinstance(text, Node):
        return text
    m = _NODE_RE.match(str(text).strip())
    if not m:
        raise ConfigError(f"bad node reference {text!r} (expected e<N> or s<N>)")
    return Node("ecu" if m.group(1) == "e" else "switch", int(m.group(2)))


@dataclass(frozen=True)
class Ecu:
    id: int
    slot_capacity: int
    failure_rate: float = DEFAULT_FAILURE_RATE

    def __post_init__(self):
        if self.slot_capacity < 1:
            raise ConfigError(f"ECU {self.id}: slot_capacity must be >= 1")
        if not self.failure_rate > 0:
            raise ConfigError(f"ECU {self.id}: failure_rate must be > 0")


@dataclass(frozen=True)
class Switch:
    id: int


@dataclass(frozen=True)
class Link:
    id: int
    a: Node
    b: Node

    def __post_init__(self):
        if self.a == self.b:
            raise ConfigError(f"link {self.id} connects {self.a} to itself")

    def touches(self, node: Node) -> bool:
        return node == self.a or node == self.b

    def other(self, node: Node) -> Node:
        return self.b if node == self.a else self.a


@dataclass(frozen=True)
class Topology:
    ecus: tuple
    switches: tuple
    links: tuple
    adjacency: dict = field(repr=False, compare=False)

    @property
    def ecu_ids(self) -> list[int]:
        return [e.id for e in self.ecus]

    def neighbours(self, node: Node):
        """``(neighbour, link)`` pairs sorted by neighbour then link id."""
        return self.adjacency.get(node, ())


def build_topology(ecus, switches=(), links=()) -> Topology:
    """Validate nodes and links and build the adjacency map.

    ``links`` holds ``(a, b)`` node pairs (``Node`` or ``"e0"``-style text) or
    ready-made :class:`Link` objects.
    """
    ecus = tuple(ecus)
    switches = tuple(switches)
    _check_dense(ecus, "ECU")
    _check_dense(switches, "switch")
    nodes = {ecu(e.id) for e in ecus} | {switch(s.id) for s in switches}

    built = []
    for i, item in enumerate(links):
        if isinstance(item, Link):
            link = item
        else:
            a, b = item
            link = Link(i, parse_node(a), parse_node(b))
        for end in (link.a, link.b):
            if end not in nodes:
                raise ConfigError(f"link {link.id} references undeclared node {end}")
        built.append(link)
    if len({l.id for l in built}) != len(built):
        raise DuplicateId("duplicate link id")

    adjacency: dict[Node, list] = {n: [] for n in nodes}
    for link in built:
        adjacency[link.a].append((link.b, link))
        adjacency[link.b].append((link.a, link))
    adjacency = {
        n: tuple(sorted(v, key=lambda p: (_node_key(p[0]), p[1].id)))
        for n, v in adjacency.items()
    }
    topo = Topology(ecus, switches, tuple(built), adjacency)

    if ecus:
        seen = _reachable(topo, ecu(ecus[0].id))
        missing = [e.id for e in ecus if ecu(e.id) not in seen]
        if missing:
            raise DisconnectedTopology(f"ECUs unreachable from e{ecus[0].id}: {missing}")
    return topo


def _check_dense(items, what):
    ids = [x.id for x in items]
    if len(set(ids)) != len(ids):
        raise DuplicateId(f"duplicate {what} id in {ids}")
    if sorted(ids) != list(range(len(ids))):
        raise ConfigError(f"{what} ids must be dense 0..{len(ids) - 1}, got {sorted(ids)}")


def _node_key(node: Node):
    # ECUs sort before switches; within a kind, by id
    return (0 if node.kind == "ecu" else 1, node.id)


def _reachable(topo, start):
    seen = {start}
    stack = [start]
    while stack:
        n = stack.pop()
        for m, _ in topo.neighbours(n):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def total_capacity(topology: Topology) -> int:
    return sum(e.slot_capacity for e in topology.ecus)


def _distances_to(topology, target):
    """Dijkstra from ``target`` with unit link weights."""
    dist = {target: 0}
    heap = [(0, _node_key(target), target)]
    while heap:
        d, _, n = heapq.heappop(heap)
        if d > dist[n]:
            continue
        for m, _link in topology.neighbours(n):
            nd = d + 1
            if nd < dist.get(m, float("inf")):
                dist[m] = nd
                heapq.heappush(heap, (nd, _node_key(m), m))
    return dist


def shortest_route(topology: Topology, src, dst) -> list[Link]:
    """Minimum-hop link sequence from ECU ``src`` to ECU ``dst``.

    Among equal-length paths the walk always steps to the smallest next node,
    so the result is unique per pair.
    """
    src = src if isinstance(src, Node) else ecu(int(src))
    dst = dst if isinstance(dst, Node) else ecu(int(dst))
    if src == dst:
        return []
    dist = _distances_to(topology, dst)
    if src not in dist:
        raise NoRoute(f"no route {src} -> {dst}")
    path = []
    node = src
    while node != dst:
        for nxt, link in topology.neighbours(node):
            if dist.get(nxt) == dist[node] - 1:
                path.append(link)
                node = nxt
                break
    return path


def reference_platform(failure_rate=DEFAULT_FAILURE_RATE) -> Topology:
    """10 ECUs x 175 slots, two switches with five ECUs each."""
    return star_of_switches(10, 175, n_switches=2, failure_rate=failure_rate)


def star_of_switches(n_ecus, slot_capacity, n_switches=2, failure_rate=DEFAULT_FAILURE_RATE):
    """Contiguous blocks of ECUs hang off a chain of switches.

    ``slot_capacity`` is one value for all ECUs or a per-ECU list. Without
    switches the ECUs are chained directly.
    """
    caps = slot_capacity if isinstance(slot_capacity, (list, tuple)) else [slot_capacity] * n_ecus
    ecus = [Ecu(i, int(caps[i]), failure_rate) for i in range(n_ecus)]
    if n_ecus > 1 and n_switches == 0:
        links = [(ecu(i), ecu(i + 1)) for i in range(n_ecus - 1)]
        return build_topology(ecus, [], links)
    switches = [Switch(i) for i in range(n_switches)]
    per = -(-n_ecus // n_switches) if n_switches else 1
    links = [(ecu(i), switch(min(i // per, n_switches - 1))) for i in range(n_ecus)] if n_switches else []
    links += [(switch(i), switch(i + 1)) for i in range(n_switches - 1)]
    return build_topology(ecus, switches, links)


def topology_from_config(doc: dict) -> Topology:
    """Build a topology from the ``platform`` table of a config document."""
    if doc.get("preset"):
        if doc["preset"] != REFERENCE_PRESET:
            raise ConfigError(f"unknown platform preset {doc['preset']!r}")
        return reference_platform(float(doc.get("failure_rate", DEFAULT_FAILURE_RATE)))
    try:
        e = doc["ecus"]
    except KeyError:
        raise ConfigError("platform needs 'ecus' or 'preset'") from None
    rate = float(e.get("failure_rate", DEFAULT_FAILURE_RATE))
    caps = e.get("slot_capacity", 175)
    count = int(e.get("count", len(caps) if isinstance(caps, list) else 1))
    if not isinstance(caps, list):
        caps = [int(caps)] * count
    if len(caps) != count:
        raise ConfigError("ecus.slot_capacity list length must equal ecus.count")
    ecus = [Ecu(i, int(c), rate) for i, c in enumerate(caps)]
    n_sw = int(doc.get("switches", {}).get("count", 0))
    switches = [Switch(i) for i in range(n_sw)]
    if "links" in doc:
        links = [tuple(pair) for pair in doc["links"]]
        return build_topology(ecus, switches, links)
    return star_of_switches(count, caps, n_switches=n_sw, failure_rate=rate)


# --- slot tables -------------------------------------------------------------

ALLOCATION = "allocation"
RESERVATION = "reservation"


class SlotTable:
    """Allocation and reservation lanes of every TDM slot on every ECU.

    ``alloc[e][s]`` / ``resv[e][s]`` hold the owning task instance or ``None``.
    Writes go through :meth:`assign` / :meth:`clear`, which keep three
    per-ECU index sets current: ``free`` (both lanes empty), ``nc_open``
    (allocated by a non-critical task, not reserved) and ``resv_open``
    (reserved, not allocated).
    """

    def __init__(self, capacities):
        self.capacities = list(capacities)
        self.alloc = [[None] * c for c in self.capacities]
        self.resv = [[None] * c for c in self.capacities]
        self.free = [set(range(c)) for c in self.capacities]
        self.nc_open = [set() for _ in self.capacities]
        self.resv_open = [set() for _ in self.capacities]
        self._held = {}

    @classmethod
    def for_topology(cls, topology: Topology):
        return cls(e.slot_capacity for e in topology.ecus)

    @property
    def n_ecus(self):
        return len(self.capacities)

    def lane(self, name):
        if name == ALLOCATION:
            return self.alloc
        if name == RESERVATION:
            return self.resv
        raise ValueError(f"unknown lane {name!r}")

    def _reindex(self, e, s):
        a, r = self.alloc[e][s], self.resv[e][s]
        for group in (self.free, self.nc_open, self.resv_open):
            group[e].discard(s)
        if a is None and r is None:
            self.free[e].add(s)
        elif r is None:
            if not a.critical:
                self.nc_open[e].add(s)
        elif a is None:
            self.resv_open[e].add(s)

    def assign(self, e, s, lane, owner):
        row = self.lane(lane)[e]
        if row[s] is not None:
            raise LaneConflict(f"e{e} slot {s}: {lane} lane already held by {row[s]}")
        row[s] = owner
        self._held.setdefault(owner, set()).add((e, s, lane))
        self._reindex(e, s)

    def clear(self, e, s, lane):
        row = self.lane(lane)[e]
        owner = row[s]
        if owner is None:
            return
        row[s] = None
        held = self._held[owner]
        held.discard((e, s, lane))
        if not held:
            del self._held[owner]
        self._reindex(e, s)

    def release(self, owner, lane=None):
        """Drop every slot ``owner`` holds (in one lane or both)."""
        for e, s, ln in sorted(self._held.get(owner, ())):
            if lane is None or ln == lane:
                self.clear(e, s, ln)

    def held(self, owner, lane=None):
        """Sorted ``(ecu, slot)`` pairs held by ``owner``."""
        return sorted((e, s) for e, s, ln in self._held.get(owner, ()) if lane is None or ln == lane)

    def owners(self):
        return list(self._held)

    def copy(self):
        new = SlotTable.__new__(SlotTable)
        new.capacities = list(self.capacities)
        new.alloc = [list(row) for row in self.alloc]
        new.resv = [list(row) for row in self.resv]
        new.free = [set(x) for x in self.free]
        new.nc_open = [set(x) for x in self.nc_open]
        new.resv_open = [set(x) for x in self.resv_open]
        new._held = {k: set(v) for k, v in self._held.items()}
        return new

    def occupied(self, e=None) -> int:
        """Slots holding an allocation or a reservation (an overlap counts once)."""
        ecus = range(self.n_ecus) if e is None else [e]
        return sum(self.capacities[i] - len(self.free[i]) for i in ecus)

    def lane_count(self, lane) -> int:
        return sum(x is not None for row in self.lane(lane) for x in row)

    def overlap_count(self) -> int:
        return sum(
            1 for ra, rr in zip(self.alloc, self.resv) for a, r in zip(ra, rr)
            if a is not None and r is not None
        )

    def snapshot(self):
        """Hashable copy of both lanes, used for atomicity checks."""
        return (tuple(map(tuple, self.alloc)), tuple(map(tuple, self.resv)))
