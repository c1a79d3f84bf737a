"""Per-application placement agents and the whole-system mapping driver."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum

from .errors import InsufficientResources, NoCandidate
from .platform import ALLOCATION, RESERVATION, SlotTable, Topology, shortest_route
from .slots import SlotRequest, SlotStrategy, commit, pool_sizes, select_slots, candidate_slots
from .workload import ACTIVE, PASSIVE, ApplicationInstanceGraph, expand_instance_graph


class RedundancyMode(str, Enum):
    GRACEFUL_DEGRADATION = "graceful_degradation"
    ACTIVE_REDUNDANCY = "active_redundancy"
    NO_REDUNDANCY = "no_redundancy"


class EcuPolicy(str, Enum):
    RANDOM = "random"
    PREDECESSOR_HEURISTIC = "predecessor_heuristic"


SHUFFLED = "shuffled"
CRITICAL_FIRST = "critical_first"

# ECU tries per application before it is declared unmappable.
DEFAULT_BUDGET = 500
# Whole-scenario redraws when some application does not fit.
DEFAULT_SCENARIO_ATTEMPTS = 10


@dataclass
class Mapping:
    app_id: int
    mode: RedundancyMode
    alpha: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)
    rho: dict = field(default_factory=dict)
    sigma: dict = field(default_factory=dict)
    slot_assignments: dict = field(default_factory=dict)

    def ecu_of(self, inst):
        return self.alpha[inst] if inst.kind == ACTIVE else self.beta[inst]

    @property
    def ecus(self) -> set:
        return set(self.alpha.values()) | set(self.beta.values())


@dataclass
class SystemMapping:
    """Outcome of mapping a whole workload onto one platform."""

    topology: Topology
    table: SlotTable
    graphs: dict
    mappings: dict
    failures: dict
    mode: RedundancyMode
    order: list
    attempts: int = 1

    @property
    def ok(self) -> bool:
        return not self.failures


def choose_ecu(candidates, policy, predecessors=(), rng=None):
    """Pick one ECU from ``candidates``.

    The predecessor heuristic takes a candidate that already hosts a
    predecessor instance when one exists; otherwise (and for the random
    policy) the choice is uniform.
    """
    candidates = sorted(candidates)
    if not candidates:
        raise NoCandidate("no feasible ECU")
    if EcuPolicy(policy) is EcuPolicy.PREDECESSOR_HEURISTIC:
        preferred = [e for e in candidates if e in set(predecessors)]
        if preferred:
            return rng.choice(preferred) if len(preferred) > 1 else preferred[0]
    return rng.choice(candidates)


class _Agent:
    """Places one application; every slot write is logged for rollback."""

    def __init__(self, graph, topology, table, strategy, policy, mode, rng, route_cache,
                 budget=None):
        self.graph = graph
        self.topology = topology
        self.table = table
        self.strategy = SlotStrategy(strategy)
        self.policy = EcuPolicy(policy)
        self.mode = RedundancyMode(mode)
        self.rng = rng
        self.route_cache = route_cache
        self.log = []
        self.budget = DEFAULT_BUDGET if budget is None else budget

    def request_for(self, inst):
        demand = self.graph.application.task(inst.task).slot_demand
        lane = RESERVATION if inst.kind == PASSIVE and self.mode is RedundancyMode.GRACEFUL_DEGRADATION else ALLOCATION
        return SlotRequest(inst, lane, demand)

    def feasible(self, request, exclude=None):
        out = []
        for e in range(self.table.n_ecus):
            if e == exclude:
                continue
            nfree, nover = pool_sizes(self.table, e, request)
            if nfree + nover >= request.count:
                out.append(e)
        return out

    def tiered(self, candidates, request):
        """Restrict candidates to ECUs where the strategy's preferred pool is deepest."""
        if self.strategy is SlotStrategy.RANDOM or len(candidates) <= 1:
            return candidates
        pick = 0 if self.strategy is SlotStrategy.FREE_FIRST else 1
        score = {e: min(request.count, pool_sizes(self.table, e, request)[pick]) for e in candidates}
        best = max(score.values())
        return [e for e in candidates if score[e] == best]

    def place(self, inst, ecu, request):
        free, overlap = candidate_slots(self.table, ecu, request)
        chosen = select_slots(free, overlap, request.count, self.strategy, self.rng)
        commit(self.table, ecu, request, chosen)
        self.log.extend((ecu, s, request.lane) for s in chosen)
        return (ecu, tuple(chosen), request.lane)

    def undo_to(self, mark):
        while len(self.log) > mark:
            e, s, lane = self.log.pop()
            self.table.clear(e, s, lane)

    def rollback(self):
        self.undo_to(0)

    def ranked(self, request, predecessors, exclude=None):
        """Feasible ECUs in the order the agent will try them.

        The head of the list is what :func:`choose_ecu` would pick: a uniform
        draw from predecessor hosts (heuristic policy) or from the strategy's
        preferred tier. The rest follow as fallbacks for backtracking.
        """
        candidates = self.feasible(request, exclude)
        groups = []
        if self.policy is EcuPolicy.PREDECESSOR_HEURISTIC:
            hosting = [e for e in candidates if e in predecessors]
            groups.append(hosting)
            candidates = [e for e in candidates if e not in predecessors]
        top = self.tiered(candidates, request)
        groups += [top, [e for e in candidates if e not in top]]
        ranked = []
        for g in groups:
            g = sorted(g)
            self.rng.shuffle(g)
            ranked += g
        return ranked

    def run(self) -> Mapping:
        g = self.graph
        app = g.application
        redundant = app.critical and self.mode is not RedundancyMode.NO_REDUNDANCY
        m = Mapping(app.id, self.mode)
        steps = []
        for task in _topological(app):
            steps.append(g.active(task.id))
            if redundant:
                steps.append(g.passive(task.id))
        critical_alloc = sum(self.request_for(i).count for i in steps
                             if i.critical and self.request_for(i).lane == ALLOCATION)
        budget = [self.budget]

        def place_from(k, crit_left):
            if k == len(steps):
                return True
            if crit_left > sum(len(f) for f in self.table.free):
                return False
            inst = steps[k]
            req = self.request_for(inst)
            if inst.kind == ACTIVE:
                preds = {m.alpha[g.active(p)] for p in app.predecessors(inst.task)}
                exclude = None
            else:
                preds = {m.beta[g.passive(p)] for p in app.predecessors(inst.task)}
                exclude = m.alpha[g.active(inst.task)]
            binding = m.alpha if inst.kind == ACTIVE else m.beta
            for e in self.ranked(req, preds, exclude):
                if budget[0] <= 0:
                    return False
                budget[0] -= 1
                mark = len(self.log)
                m.slot_assignments[inst] = self.place(inst, e, req)
                binding[inst] = e
                left = crit_left - (req.count if inst.critical and req.lane == ALLOCATION else 0)
                if place_from(k + 1, left):
                    return True
                self.undo_to(mark)
                del binding[inst], m.slot_assignments[inst]
            return False

        if not place_from(0, critical_alloc):
            raise NoCandidate(f"no placement for application {app.id}")
        _route_messages(m, g, self.topology, self.route_cache, redundant)
        return m


def _route_messages(m, graph, topology, cache, redundant):
    for msg in graph.edges:
        if msg.kind != ACTIVE and not redundant:
            continue
        key = (m.ecu_of(msg.producer), m.ecu_of(msg.consumer))
        if key not in cache:
            cache[key] = shortest_route(topology, *key)
        (m.rho if msg.kind == ACTIVE else m.sigma)[msg] = cache[key]


def _topological(app):
    order, placed = [], set()
    remaining = list(app.tasks)
    while remaining:
        for t in remaining:
            if all(p in placed for p in app.predecessors(t.id)):
                order.append(t)
                placed.add(t.id)
                remaining.remove(t)
                break
    return order


def map_application(graph: ApplicationInstanceGraph, topology, table, strategy, policy, mode,
                    rng, budget=DEFAULT_BUDGET, route_cache=None) -> Mapping:
    """Bind, slot and route every instance of one application, or nothing.

    The agent walks the instances in task order and backtracks over ECU
    choices, trying at most ``budget`` placements. On failure the slot
    table is restored exactly.
    """
    route_cache = {} if route_cache is None else route_cache
    agent = _Agent(graph, topology, table, strategy, policy, mode, rng, route_cache, budget)
    try:
        return agent.run()
    except NoCandidate:
        agent.rollback()
        raise InsufficientResources(
            f"application {graph.application.id} does not fit", graph.application.id) from None


def map_system(apps, topology, strategy, policy, mode, seed, mapping_order=SHUFFLED,
               budget=DEFAULT_BUDGET, scenario_attempts=DEFAULT_SCENARIO_ATTEMPTS) -> SystemMapping:
    """Map applications one at a time in seeded order.

    Per-application failures are recorded, not raised. If any application
    fails, the whole scenario is redrawn from a seed derived from ``seed``,
    up to ``scenario_attempts`` times; the last draw is returned either way.
    """
    for attempt in range(max(1, scenario_attempts)):
        rng = random.Random(seed if attempt == 0 else f"{seed}/{attempt}")
        result = _map_once(apps, topology, strategy, policy, mode, rng, mapping_order, budget)
        result.attempts = attempt + 1
        if result.ok:
            break
    return result


def _map_once(apps, topology, strategy, policy, mode, rng, mapping_order, budget):
    table = SlotTable.for_topology(topology)
    graphs = {a.id: expand_instance_graph(a) for a in apps}
    order = [a.id for a in apps]
    rng.shuffle(order)
    if mapping_order == CRITICAL_FIRST:
        order.sort(key=lambda i: not graphs[i].critical)
    elif mapping_order != SHUFFLED:
        raise ValueError(f"unknown mapping_order {mapping_order!r}")
    mappings, failures, cache = {}, {}, {}
    for app_id in order:
        try:
            mappings[app_id] = map_application(graphs[app_id], topology, table, strategy, policy,
                                               mode, rng, budget, cache)
        except InsufficientResources as exc:
            failures[app_id] = exc
    return SystemMapping(topology, table, graphs, mappings, failures, RedundancyMode(mode), order)


def map_fixed(apps, topology, placements, mode, strategy=SlotStrategy.FREE_FIRST, seed=0):
    """Map with prescribed ECU bindings.

    ``placements`` maps app id to ``{"alpha": [ecu per task], "beta": [...],
    "alpha_slots": [[slot, ...] per task], "beta_slots": [...]}``; slot lists
    are optional and otherwise chosen by ``strategy``. Applications without an
    entry are placed by a random-policy agent. Apps are processed in the given
    order and any conflict raises.
    """
    mode = RedundancyMode(mode)
    rng = random.Random(seed)
    table = SlotTable.for_topology(topology)
    graphs = {a.id: expand_instance_graph(a) for a in apps}
    mappings, failures, cache = {}, {}, {}
    for app in apps:
        g = graphs[app.id]
        spec = placements.get(app.id)
        if spec is None:
            try:
                mappings[app.id] = map_application(g, topology, table, strategy, EcuPolicy.RANDOM,
                                                   mode, rng, route_cache=cache)
            except InsufficientResources as exc:
                failures[app.id] = exc
            continue
        agent = _Agent(g, topology, table, strategy, EcuPolicy.RANDOM, mode, rng, cache)
        m = Mapping(app.id, mode)
        redundant = app.critical and mode is not RedundancyMode.NO_REDUNDANCY
        kinds = [(ACTIVE, "alpha")] + ([(PASSIVE, "beta")] if redundant else [])
        for kind, key in kinds:
            ecus = spec.get(key)
            if ecus is None or len(ecus) != len(app.tasks):
                raise ValueError(f"app {app.id}: {key} needs one ECU per task")
            slot_lists = spec.get(f"{key}_slots")
            for i, task in enumerate(app.tasks):
                inst = g.active(task.id) if kind == ACTIVE else g.passive(task.id)
                req = agent.request_for(inst)
                e = int(ecus[i])
                if slot_lists is not None:
                    chosen = sorted(int(s) for s in slot_lists[i])
                    if len(chosen) != req.count:
                        raise ValueError(f"{inst}: expected {req.count} slots, got {len(chosen)}")
                    commit(table, e, req, chosen)
                    m.slot_assignments[inst] = (e, tuple(chosen), req.lane)
                else:
                    m.slot_assignments[inst] = agent.place(inst, e, req)
                (m.alpha if kind == ACTIVE else m.beta)[inst] = e
        _route_messages(m, g, topology, cache, redundant)
        mappings[app.id] = m
    return SystemMapping(topology, table, graphs, mappings, failures, mode, [a.id for a in apps])
