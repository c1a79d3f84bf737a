"""Discrete-event failure injection: heartbeats, watchdogs, failover, degradation.

The simulator works on a private copy of the slot table. A failed ECU stops
sending heartbeats; its watchdog fires ``watchdog_timeout`` after the last
heartbeat it delivered, and only then do critical applications activate the
passive instances of the tasks they lost. Activation converts reservations
into allocations, which shuts down every non-critical application that held
one of those slots.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import DegradeLabError
from .slots import degrade

OPERATIONAL = "operational"
FAILED_DIRECT = "failed_direct"
FAILED_DEGRADED = "failed_degraded"

# tie order for events at the same instant
_RANK = {"ecu_failure": 0, "heartbeat": 1, "watchdog_timeout": 2, "passive_activation": 3,
         "app_shutdown": 4}


@dataclass(frozen=True)
class FailSimConfig:
    heartbeat_period: float = 10.0
    watchdog_timeout: float = 30.0


@dataclass(frozen=True, order=True)
class SimEvent:
    time: float
    rank: int
    key: tuple
    kind: str = field(compare=False)
    subject: str = field(compare=False)
    detail: str = field(compare=False, default="")
    data: object = field(compare=False, default=None)

    def line(self) -> str:
        return f"{self.time:g} {self.kind} {self.subject} {self.detail}".rstrip()


@dataclass
class SimOutcome:
    status: dict
    trace: list

    def operational(self, app_id) -> bool:
        return self.status[app_id] == OPERATIONAL

    def trace_text(self) -> str:
        return "".join(ev.line() + "\n" for ev in self.trace)


class _Sim:
    def __init__(self, system, config):
        self.system = system
        self.cfg = config
        self.table = system.table.copy()
        self.n_ecus = system.table.n_ecus
        self.alive = [True] * self.n_ecus
        self.last_hb = [0.0] * self.n_ecus
        self.detected = [False] * self.n_ecus
        self.status = {a: OPERATIONAL for a in system.mappings}
        # instance -> ECU for every bound instance; passives start on standby
        self.where = {}
        self.running = set()
        self.dead = set()
        for m in system.mappings.values():
            for inst, e in m.alpha.items():
                self.where[inst] = e
                self.running.add(inst)
            for inst, e in m.beta.items():
                self.where[inst] = e
                if system.mode.value == "active_redundancy":
                    self.running.add(inst)
        self.queue = []
        self.trace = []

    def push(self, time, kind, subject, key, detail="", data=None):
        heapq.heappush(self.queue, SimEvent(time, _RANK[kind], key, kind, subject, detail, data))

    def shutdown(self, app_id, status, time, reason):
        if self.status[app_id] != OPERATIONAL:
            return
        self.status[app_id] = status
        for inst in [i for i in self.where if i.app == app_id]:
            self.table.release(inst)
            self.running.discard(inst)
        self.push(time, "app_shutdown", f"a{app_id}", (app_id,), f"{status} {reason}")

    def task_lost(self, app_id, task_id):
        graph = self.system.graphs[app_id]
        insts = [graph.active(task_id)]
        if graph.critical and graph.passive(task_id) in self.where:
            insts.append(graph.passive(task_id))
        return all(i in self.dead for i in insts)

    def on_failure(self, t, e):
        if not self.alive[e]:
            return
        self.alive[e] = False
        for inst, where in sorted(self.where.items()):
            if where == e:
                self.dead.add(inst)
                self.running.discard(inst)
        for app_id in sorted(self.status):
            if self.status[app_id] != OPERATIONAL:
                continue
            graph = self.system.graphs[app_id]
            lost = [tk.id for tk in graph.application.tasks
                    if (graph.active(tk.id) in self.dead if not graph.critical
                        else self.task_lost(app_id, tk.id))]
            if lost:
                self.shutdown(app_id, FAILED_DIRECT, t, f"task t{lost[0]} lost on e{e}")

    def on_watchdog(self, t, e):
        self.detected[e] = True
        for app_id in sorted(self.status):
            graph = self.system.graphs[app_id]
            if self.status[app_id] != OPERATIONAL or not graph.critical:
                continue
            for tk in graph.application.tasks:
                act = graph.active(tk.id)
                pas = graph.passive(tk.id)
                if self.where.get(act) == e and pas in self.where and pas not in self.running \
                        and pas not in self.dead:
                    self.push(t, "passive_activation", str(pas), (pas.app, pas.task), f"replaces {act}")

    def on_activation(self, t, pas):
        if self.status[pas.app] != OPERATIONAL or pas in self.dead or pas in self.running:
            return
        victims = degrade(self.table, pas)
        self.running.add(pas)
        for v in sorted(victims):
            self.shutdown(v.app, FAILED_DEGRADED, t, f"slot taken by {pas}")

    def run(self, failures):
        failures = sorted((float(t), int(e)) for e, t in failures)
        for t, e in failures:
            if not 0 <= e < self.n_ecus:
                raise DegradeLabError(f"unknown ECU e{e}")
            if t < 0:
                raise DegradeLabError("failure time must be non-negative")
            self.push(t, "ecu_failure", f"e{e}", (e,))
        period, timeout = self.cfg.heartbeat_period, self.cfg.watchdog_timeout
        horizon = (failures[-1][0] if failures else 0.0) + timeout + 2 * period
        for e in range(self.n_ecus):
            self.push(timeout, "watchdog_timeout", f"e{e}", (e,), "last heartbeat 0", 0.0)
            self.push(period, "heartbeat", f"e{e}", (e,))
        while self.queue:
            ev = heapq.heappop(self.queue)
            if ev.time > horizon:
                break
            e = ev.key[0]
            if ev.kind == "heartbeat":
                if not self.alive[e]:
                    continue
                self.last_hb[e] = ev.time
                self.push(ev.time + timeout, "watchdog_timeout", ev.subject, ev.key,
                          f"last heartbeat {ev.time:g}", ev.time)
                self.push(ev.time + period, "heartbeat", ev.subject, ev.key)
                continue  # heartbeats are not traced
            if ev.kind == "watchdog_timeout":
                # only the watchdog armed by the last delivered heartbeat counts
                if self.alive[e] or self.detected[e] or self.last_hb[e] != ev.data:
                    continue
                self.trace.append(ev)
                self.on_watchdog(ev.time, e)
                continue
            self.trace.append(ev)
            if ev.kind == "ecu_failure":
                self.on_failure(ev.time, e)
            elif ev.kind == "passive_activation":
                graph = self.system.graphs[ev.key[0]]
                self.on_activation(ev.time, graph.passive(ev.key[1]))
        return SimOutcome(dict(self.status), self.trace)


def simulate_failures(system, failures, config=None) -> SimOutcome:
    """Inject ``failures`` (iterable of ``(ecu, time)``) into a mapped system."""
    return _Sim(system, config or FailSimConfig()).run(failures)


def oracle_check(system, failed_ecu, structure_functions=None, config=None) -> bool:
    """Simulated single-failure outcome agrees with every structure function."""
    from .structfn import build_all

    if not system.mappings:
        return True
    sfs = structure_functions if structure_functions is not None else build_all(system)
    outcome = simulate_failures(system, [(failed_ecu, 0.0)], config)
    state = [1] * system.table.n_ecus
    state[failed_ecu] = 0
    return all(bool(sfs[a].eval(state)) == outcome.operational(a) for a in sfs)


__all__ = ["FailSimConfig", "SimEvent", "SimOutcome", "simulate_failures", "oracle_check",
           "OPERATIONAL", "FAILED_DIRECT", "FAILED_DEGRADED"]
