"""Per-application structure functions over ECU status variables.

A critical application survives while every task keeps its active or its
passive instance. A non-critical application needs every active instance and
is also lost when a critical passive that reserved one of its slots gets
activated, i.e. when that critical task's active ECU fails.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bdd import BddManager
from .errors import UnmappedInstance
from .platform import ALLOCATION
from .workload import ACTIVE, TaskInstance


@dataclass(frozen=True)
class StructureFunction:
    app_id: int
    critical: bool
    manager: BddManager
    root: int

    @property
    def support(self) -> set:
        return self.manager.support(self.root)

    @property
    def size(self) -> int:
        return self.manager.size(self.root)

    def eval(self, ecu_up) -> int:
        return self.manager.eval(self.root, ecu_up)

    def polynomial(self):
        return self.manager.reliability_polynomial(self.root)


def _bound(mapping, inst):
    binding = mapping.alpha if inst.kind == ACTIVE else mapping.beta
    try:
        return binding[inst]
    except KeyError:
        raise UnmappedInstance(f"{inst} has no binding") from None


def build_critical(graph, mapping, manager: BddManager) -> StructureFunction:
    """AND over tasks of (y[alpha(active)] OR y[beta(passive)]).

    Without a passive binding (no-redundancy runs) the task term is just the
    active ECU.
    """
    terms = []
    redundant = bool(mapping.beta)
    for task in graph.application.tasks:
        a = _bound(mapping, graph.active(task.id))
        if redundant:
            b = _bound(mapping, graph.passive(task.id))
            terms.append(manager.or_(manager.var(a), manager.var(b)))
        else:
            terms.append(manager.var(a))
    return StructureFunction(graph.application.id, True, manager, manager.conjoin(terms))


def coupling_set(instance: TaskInstance, table, mappings=None) -> set:
    """Critical tasks ``(app, task)`` whose passive reserved a slot ``instance`` allocates."""
    out = set()
    for e, s in table.held(instance, ALLOCATION):
        owner = table.resv[e][s]
        if owner is not None:
            out.add((owner.app, owner.task))
    return out


def build_noncritical(graph, mapping, table, mappings, manager: BddManager) -> StructureFunction:
    """AND over tasks of y[alpha(active)] AND y[alpha(reserving critical active)]...

    ``mappings`` maps app id to :class:`~degradelab.mapping.Mapping` and is
    used to look up where each coupled critical task's active instance runs.
    """
    terms = []
    for task in graph.application.tasks:
        inst = graph.active(task.id)
        terms.append(manager.var(_bound(mapping, inst)))
        for app_id, task_id in sorted(coupling_set(inst, table, mappings)):
            other = TaskInstance(app_id, task_id, ACTIVE, True)
            try:
                terms.append(manager.var(mappings[app_id].alpha[other]))
            except KeyError:
                raise UnmappedInstance(f"coupled instance {other} has no binding") from None
    return StructureFunction(graph.application.id, False, manager, manager.conjoin(terms))


def build_all(system, manager=None) -> dict:
    """Structure functions for every mapped application of a system mapping."""
    manager = manager or BddManager()
    out = {}
    for app_id in sorted(system.mappings):
        graph = system.graphs[app_id]
        m = system.mappings[app_id]
        if graph.critical:
            out[app_id] = build_critical(graph, m, manager)
        else:
            out[app_id] = build_noncritical(graph, m, system.table, system.mappings, manager)
    return out
