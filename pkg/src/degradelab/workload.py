"""Applications, task graphs and their expansion into instance graphs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import ConfigError, InvalidCount

CRITICAL = "critical"
NON_CRITICAL = "non_critical"
ACTIVE = "active"
PASSIVE = "passive"
BACKUP = "backup"


@dataclass(frozen=True)
class Task:
    id: int
    slot_demand: int = 5

    def __post_init__(self):
        if self.slot_demand < 1:
            raise ConfigError(f"task {self.id}: slot_demand must be >= 1")


@dataclass(frozen=True)
class Application:
    id: int
    criticality: str
    tasks: tuple
    messages: tuple = ()
    period: float = 1.0
    deadline: float = 1.0

    def __post_init__(self):
        if self.criticality not in (CRITICAL, NON_CRITICAL):
            raise ConfigError(f"app {self.id}: unknown criticality {self.criticality!r}")
        if self.deadline > self.period:
            raise ConfigError(f"app {self.id}: deadline exceeds period")
        ids = {t.id for t in self.tasks}
        if len(ids) != len(self.tasks):
            raise ConfigError(f"app {self.id}: duplicate task ids")
        for p, c in self.messages:
            if p not in ids or c not in ids:
                raise ConfigError(f"app {self.id}: message ({p}, {c}) references unknown task")
        if _has_cycle(ids, self.messages):
            raise ConfigError(f"app {self.id}: task graph is cyclic")

    @property
    def critical(self) -> bool:
        return self.criticality == CRITICAL

    @property
    def demand(self) -> int:
        return sum(t.slot_demand for t in self.tasks)

    def task(self, task_id) -> Task:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def predecessors(self, task_id) -> list[int]:
        return [p for p, c in self.messages if c == task_id]


def _has_cycle(ids, messages):
    succ = {i: [] for i in ids}
    for p, c in messages:
        succ[p].append(c)
    state = dict.fromkeys(ids, 0)

    def visit(n):
        state[n] = 1
        for m in succ[n]:
            if state[m] == 1 or (state[m] == 0 and visit(m)):
                return True
        state[n] = 2
        return False

    return any(state[i] == 0 and visit(i) for i in ids)


class TaskInstance(NamedTuple):
    app: int
    task: int
    kind: str  # ACTIVE or PASSIVE
    critical: bool

    def __str__(self):
        return f"a{self.app}.t{self.task}.{self.kind[0]}"


class MessageInstance(NamedTuple):
    app: int
    index: int
    producer: TaskInstance
    consumer: TaskInstance
    kind: str  # ACTIVE or BACKUP


@dataclass(frozen=True)
class ApplicationInstanceGraph:
    application: Application
    vertices: tuple
    edges: tuple

    @property
    def critical(self) -> bool:
        return self.application.critical

    def active(self, task_id) -> TaskInstance:
        return TaskInstance(self.application.id, task_id, ACTIVE, self.critical)

    def passive(self, task_id) -> TaskInstance:
        if not self.critical:
            raise KeyError(f"non-critical app {self.application.id} has no passive instances")
        return TaskInstance(self.application.id, task_id, PASSIVE, True)

    @property
    def active_instances(self):
        return [v for v in self.vertices if v.kind == ACTIVE]

    @property
    def passive_instances(self):
        return [v for v in self.vertices if v.kind == PASSIVE]


def expand_instance_graph(app: Application) -> ApplicationInstanceGraph:
    """Add passive instances and backup messages for critical applications.

    Each message of a critical app gets one active instance (a->a) and three
    backups (a->b, b->a, b->b) so some path survives whichever instances fail.
    """
    crit = app.critical
    vertices = [TaskInstance(app.id, t.id, ACTIVE, crit) for t in app.tasks]
    if crit:
        vertices += [TaskInstance(app.id, t.id, PASSIVE, True) for t in app.tasks]
    edges = []
    for i, (p, c) in enumerate(app.messages):
        pa, ca = TaskInstance(app.id, p, ACTIVE, crit), TaskInstance(app.id, c, ACTIVE, crit)
        edges.append(MessageInstance(app.id, i, pa, ca, ACTIVE))
        if crit:
            pb, cb = TaskInstance(app.id, p, PASSIVE, True), TaskInstance(app.id, c, PASSIVE, True)
            edges += [
                MessageInstance(app.id, i, pa, cb, BACKUP),
                MessageInstance(app.id, i, pb, ca, BACKUP),
                MessageInstance(app.id, i, pb, cb, BACKUP),
            ]
    return ApplicationInstanceGraph(app, tuple(vertices), tuple(edges))


def chain_application(app_id, n_tasks, slot_demand, critical) -> Application:
    tasks = tuple(Task(i, slot_demand) for i in range(n_tasks))
    messages = tuple((i, i + 1) for i in range(n_tasks - 1))
    return Application(app_id, CRITICAL if critical else NON_CRITICAL, tasks, messages)


def generate_synthetic(n_apps, n_critical, tasks_per_app=5, slot_demand=5, seed=0):
    """Chain-shaped workload; apps ``0..n_critical-1`` are critical.

    The chain shape and uniform demand leave nothing to draw at random, so
    ``seed`` does not change the result; placement randomness lives in the
    mapper.
    """
    if n_apps < 0 or n_critical < 0 or n_critical > n_apps:
        raise InvalidCount(f"need 0 <= n_critical ({n_critical}) <= n_apps ({n_apps})")
    if tasks_per_app < 1 or slot_demand < 1:
        raise InvalidCount("tasks_per_app and slot_demand must be >= 1")
    return [chain_application(i, tasks_per_app, slot_demand, i < n_critical) for i in range(n_apps)]


def applications_from_config(items) -> list[Application]:
    """Parse the ``apps`` list of a config document."""
    apps = []
    for i, item in enumerate(items):
        app_id = int(item.get("id", i))
        crit = item.get("criticality", NON_CRITICAL)
        if "tasks" in item and isinstance(item["tasks"], list):
            tasks = tuple(
                Task(int(t.get("id", j)), int(t.get("slot_demand", 5))) if isinstance(t, dict)
                else Task(j, int(t))
                for j, t in enumerate(item["tasks"])
            )
        else:
            n = int(item.get("tasks", 1))
            tasks = tuple(Task(j, int(item.get("slot_demand", 5))) for j in range(n))
        if "messages" in item:
            messages = tuple((int(p), int(c)) for p, c in item["messages"])
        else:
            messages = tuple((tasks[j].id, tasks[j + 1].id) for j in range(len(tasks) - 1))
        apps.append(Application(app_id, crit, tasks, messages,
                                float(item.get("period", 1.0)), float(item.get("deadline", 1.0))))
    if len({a.id for a in apps}) != len(apps):
        raise ConfigError("duplicate application id")
    return apps
