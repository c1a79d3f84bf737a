"""Parameter sweeps over critical-application count, mode, strategy and policy."""

from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import lru_cache

from .bdd import BddManager
from .errors import ConfigError, DegradeLabError, UndefinedBaseline
from .mapping import (DEFAULT_BUDGET, DEFAULT_SCENARIO_ATTEMPTS, SHUFFLED, EcuPolicy,
                      RedundancyMode, map_fixed, map_system)
from .platform import Topology, reference_platform, total_capacity
from .reliability import degradation_limits, mttf_reduction_nc, r_savings
from .slots import SlotStrategy
from .structfn import build_all
from .workload import generate_synthetic

ALL_MODES = (RedundancyMode.NO_REDUNDANCY, RedundancyMode.ACTIVE_REDUNDANCY,
             RedundancyMode.GRACEFUL_DEGRADATION)
DEFAULT_N_CRITICAL = tuple(range(0, 41, 5))
DEFAULT_SEEDS = tuple(range(20))


@dataclass(frozen=True)
class ScenarioConfig:
    topology: Topology = field(default_factory=reference_platform)
    n_apps: int = 40
    n_critical: tuple = DEFAULT_N_CRITICAL
    tasks_per_app: int = 5
    slot_demand: int = 5
    failure_rate: float = 0.01
    strategies: tuple = (SlotStrategy.RANDOM,)
    policies: tuple = (EcuPolicy.RANDOM,)
    modes: tuple = ALL_MODES
    seeds: tuple = DEFAULT_SEEDS
    taus: tuple = ()
    mapping_order: str = SHUFFLED
    scenario_attempts: int = DEFAULT_SCENARIO_ATTEMPTS
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.n_apps < 0:
            raise ConfigError("n_apps must be >= 0")
        if self.n_apps and any(not 0 <= n <= self.n_apps for n in self.n_critical):
            raise ConfigError("every n_critical value must lie in [0, n_apps]")
        if not self.failure_rate > 0:
            raise ConfigError("failure_rate must be > 0")
        object.__setattr__(self, "strategies", tuple(SlotStrategy(s) for s in self.strategies))
        object.__setattr__(self, "policies", tuple(EcuPolicy(p) for p in self.policies))
        object.__setattr__(self, "modes", tuple(RedundancyMode(m) for m in self.modes))

    def workload(self, n_critical):
        return generate_synthetic(self.n_apps, n_critical, self.tasks_per_app, self.slot_demand)


@dataclass(frozen=True)
class SweepRow:
    n_critical: int
    mode: str
    strategy: str
    policy: str
    seed: object  # int, or "mean" / "std" for summary rows
    mttf_avg_critical: float | None
    mttf_avg_noncritical: float | None
    slots_occupied: float | None
    r_savings: float | None
    mttf_reduction_nc: float | None
    mapped_ok: bool
    mean_ecus_per_app: float | None


COLUMNS = tuple(f.name for f in fields(SweepRow))
METRICS = ("mttf_avg_critical", "mttf_avg_noncritical", "slots_occupied", "r_savings",
           "mttf_reduction_nc", "mean_ecus_per_app")


@dataclass
class RunResult:
    """Everything measured on one mapped scenario."""

    system: object
    mttf: dict  # app id -> analytic MTTF
    ok: bool
    slots_occupied: int
    mean_ecus_per_app: float | None

    def class_avg(self, critical):
        vals = [v for a, v in self.mttf.items() if self.system.graphs[a].critical == critical]
        return math.fsum(vals) / len(vals) if vals else None


@lru_cache(maxsize=4096)
def _poly_mttf(coefficients, failure_rate):
    from .bdd import ReliabilityPolynomial

    return ReliabilityPolynomial(coefficients).mttf(failure_rate)


def min_slots(apps, mode) -> int:
    """Capacity-only lower bound on slots a mode needs for ``apps``."""
    total = sum(a.demand for a in apps)
    crit = sum(a.demand for a in apps if a.critical)
    mode = RedundancyMode(mode)
    if mode is RedundancyMode.NO_REDUNDANCY:
        return total
    if mode is RedundancyMode.ACTIVE_REDUNDANCY:
        return total + crit
    return total + max(0, crit - (total - crit))


def evaluate(system, failure_rate) -> RunResult:
    if not system.ok:
        return RunResult(system, {}, False, system.table.occupied(), None)
    sfs = build_all(system, BddManager())
    values = {a: _poly_mttf(sf.polynomial().coefficients, failure_rate) for a, sf in sfs.items()}
    spread = [len(m.ecus) for m in system.mappings.values()]
    mean_ecus = sum(spread) / len(spread) if spread else None
    return RunResult(system, values, True, system.table.occupied(), mean_ecus)


def class_curves(system, failure_rate, taus):
    """Mean reliability of critical and non-critical apps at each tau.

    Returns ``[(tau, mean_R_critical, mean_R_noncritical), ...]`` with
    ``None`` for an empty class; plotting is left to the caller.
    """
    sfs = build_all(system, BddManager())
    out = []
    for tau in taus:
        r = math.exp(-failure_rate * tau)
        by_class = {True: [], False: []}
        for sf in sfs.values():
            by_class[sf.critical].append(sf.manager.probability(sf.root, r))
        out.append((float(tau), *(math.fsum(v) / len(v) if v else None
                                  for v in (by_class[True], by_class[False]))))
    return out


def run_point(config: ScenarioConfig, n_critical, mode, strategy, policy, seed, apps=None):
    apps = config.workload(n_critical) if apps is None else apps
    # don't burn redraws on a point that cannot fit by counting alone
    hopeless = min_slots(apps, mode) > total_capacity(config.topology)
    system = map_system(apps, config.topology, strategy, policy, mode, seed,
                        mapping_order=config.mapping_order, budget=config.budget,
                        scenario_attempts=1 if hopeless else config.scenario_attempts)
    return evaluate(system, config.failure_rate)


def _unit(args):
    """All modes of one (n_critical, strategy, policy, seed) cell."""
    config, n_critical, strategy, policy, seed = args
    apps = config.workload(n_critical)
    needed = set(config.modes)
    if RedundancyMode.GRACEFUL_DEGRADATION in needed:
        needed |= {RedundancyMode.NO_REDUNDANCY, RedundancyMode.ACTIVE_REDUNDANCY}
    runs = {m: run_point(config, n_critical, m, strategy, policy, seed, apps)
            for m in ALL_MODES if m in needed}
    rows = []
    for mode in config.modes:
        rows.append(_row(n_critical, mode, strategy, policy, seed, runs[mode], runs))
    return rows


def _row(n_critical, mode, strategy, policy, seed, run, runs):
    key = (n_critical, mode.value, strategy.value, policy.value, seed)
    if not run.ok:
        return SweepRow(*key, None, None, None, None, None, False, None)
    saving = reduction = None
    if mode is RedundancyMode.GRACEFUL_DEGRADATION:
        none_run = runs[RedundancyMode.NO_REDUNDANCY]
        active_run = runs[RedundancyMode.ACTIVE_REDUNDANCY]
        if none_run.ok and active_run.ok:
            try:
                saving = r_savings(active_run.slots_occupied - none_run.slots_occupied,
                                   run.slots_occupied - none_run.slots_occupied)
            except UndefinedBaseline:
                pass
        base_nc = active_run.class_avg(False) if active_run.ok else None
        deg_nc = run.class_avg(False)
        if base_nc is not None and deg_nc is not None:
            reduction = mttf_reduction_nc(base_nc, deg_nc)
    return SweepRow(*key, run.class_avg(True), run.class_avg(False), run.slots_occupied,
                    saving, reduction, True, run.mean_ecus_per_app)


def run_sweep(config: ScenarioConfig, jobs: int = 1, summary: bool = True) -> list[SweepRow]:
    """One row per (point, mode, strategy, policy, seed), then mean/std rows.

    Infeasible points give ``mapped_ok=False`` with empty metrics. Graceful rows
    carry ``r_savings`` and ``mttf_reduction_nc`` measured against the other
    two modes at the same point and seed.
    """
    if config.n_apps == 0:
        return []
    units = [(config, nc, st, po, seed)
             for nc in config.n_critical
             for po in config.policies
             for st in config.strategies
             for seed in config.seeds]
    if jobs and jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_unit, units, chunksize=max(1, len(units) // (4 * jobs))))
    else:
        chunks = [_unit(u) for u in units]
    rows = [r for chunk in chunks for r in chunk]
    # units are enumerated per seed; regroup so seeds of one series are adjacent
    mode_rank = {m.value: i for i, m in enumerate(config.modes)}
    pol_rank = {p.value: i for i, p in enumerate(config.policies)}
    st_rank = {s.value: i for i, s in enumerate(config.strategies)}
    seed_rank = {s: i for i, s in enumerate(config.seeds)}
    rows.sort(key=lambda r: (r.n_critical, pol_rank[r.policy], st_rank[r.strategy],
                             mode_rank[r.mode], seed_rank[r.seed]))
    return rows + summarize(rows) if summary else rows


def summarize(rows) -> list[SweepRow]:
    """Mean and sample standard deviation per (point, mode, strategy, policy)."""
    groups = {}
    for r in rows:
        if isinstance(r.seed, str):
            continue
        groups.setdefault((r.n_critical, r.mode, r.strategy, r.policy), []).append(r)
    out = []
    for key, members in groups.items():
        ok = all(r.mapped_ok for r in members)
        means, stds = {}, {}
        for name in METRICS:
            vals = [getattr(r, name) for r in members if getattr(r, name) is not None]
            means[name] = statistics.fmean(vals) if vals else None
            stds[name] = statistics.stdev(vals) if len(vals) > 1 else (0.0 if vals else None)
        out.append(SweepRow(*key, "mean", mapped_ok=ok, **means))
        out.append(SweepRow(*key, "std", mapped_ok=ok, **stds))
    return out


def limits_table(n_apps, n_critical_values, tasks_per_app, slot_demand):
    """Rows ``(n_critical, lower, upper, active, no_redundancy)`` in slots."""
    out = []
    for nc in n_critical_values:
        lower, upper = degradation_limits(nc, n_apps - nc, tasks_per_app, slot_demand)
        base = n_apps * tasks_per_app * slot_demand
        out.append((nc, lower, upper, base + nc * tasks_per_app * slot_demand, base))
    return out


def rebind(system, mode, critical_only=True, strategy=SlotStrategy.FREE_FIRST):
    """Place the same ECU bindings again under another redundancy mode.

    Slots are chosen afresh; only the instance-to-ECU map is carried over.
    Restricting to critical apps keeps the placement feasible, since critical
    structure functions do not depend on anything else.
    """
    apps, placements = [], {}
    for app_id in sorted(system.mappings):
        g = system.graphs[app_id]
        if critical_only and not g.critical:
            continue
        m = system.mappings[app_id]
        tasks = g.application.tasks
        spec = {"alpha": [m.alpha[g.active(t.id)] for t in tasks]}
        if m.beta:
            spec["beta"] = [m.beta[g.passive(t.id)] for t in tasks]
        apps.append(g.application)
        placements[app_id] = spec
    mode = RedundancyMode(mode)
    if mode is not RedundancyMode.NO_REDUNDANCY and any(
            "beta" not in placements[a.id] for a in apps if a.critical):
        raise DegradeLabError("source mapping has no passive bindings to carry over")
    return map_fixed(apps, system.topology, placements, mode, strategy)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def rows_to_csv(rows, delimiter=",") -> str:
    """Render rows with the fixed header, 6 significant digits and LF endings."""
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def _parse_num(text):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        return float(text)


def rows_from_csv(text, delimiter=",") -> list[SweepRow]:
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = next(reader, None)
    if header is None:
        return []
    if tuple(header) != COLUMNS:
        raise ValueError(f"unexpected header {header}")
    out = []
    for rec in reader:
        d = dict(zip(COLUMNS, rec))
        seed = d["seed"] if d["seed"] in ("mean", "std") else int(d["seed"])
        out.append(SweepRow(
            int(d["n_critical"]), d["mode"], d["strategy"], d["policy"], seed,
            mapped_ok=d["mapped_ok"] == "true",
            **{m: _parse_num(d[m]) for m in METRICS},
        ))
    return out
