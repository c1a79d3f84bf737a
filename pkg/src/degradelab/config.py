"""TOML scenario documents.

Example::

    seed = 0
    failure_rate = 0.01

    [platform]
    preset = "paper_10x175"

    [workload]
    n_apps = 40
    n_critical = 10
    tasks_per_app = 5
    slot_demand = 5

    [mapping]
    mode = "graceful_degradation"
    strategy = "random"
    policy = "random"
    mapping_order = "shuffled"

    [sweep]
    n_critical = [0, 5, 10, 15, 20, 25, 30, 35, 40]
    modes = ["no_redundancy", "active_redundancy", "graceful_degradation"]
    strategies = ["random"]
    policies = ["random"]
    seeds = 20            # a count (offset by the base seed) or an explicit list

    [failsim]
    heartbeat_period = 10
    watchdog_timeout = 30

An ``[[apps]]`` array replaces the generated workload. Entries may pin their
placement with ``alpha``/``beta`` ECU lists and optional ``alpha_slots``/
``beta_slots``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .experiment import ALL_MODES, DEFAULT_N_CRITICAL, ScenarioConfig
from .failsim import FailSimConfig
from .mapping import (DEFAULT_BUDGET, DEFAULT_SCENARIO_ATTEMPTS, SHUFFLED, CRITICAL_FIRST,
                      EcuPolicy, RedundancyMode, map_fixed, map_system)
from .platform import Topology, reference_platform, topology_from_config
from .slots import SlotStrategy
from .workload import applications_from_config, generate_synthetic

_PLACEMENT_KEYS = ("alpha", "beta", "alpha_slots", "beta_slots")


@dataclass
class Settings:
    topology: Topology = field(default_factory=reference_platform)
    seed: int = 0
    failure_rate: float = 0.01
    n_apps: int = 40
    n_critical: int = 0
    tasks_per_app: int = 5
    slot_demand: int = 5
    apps: list | None = None
    placements: dict = field(default_factory=dict)
    mode: RedundancyMode = RedundancyMode.GRACEFUL_DEGRADATION
    strategy: SlotStrategy = SlotStrategy.RANDOM
    policy: EcuPolicy = EcuPolicy.RANDOM
    mapping_order: str = SHUFFLED
    scenario_attempts: int = DEFAULT_SCENARIO_ATTEMPTS
    budget: int = DEFAULT_BUDGET
    sweep_n_critical: tuple = DEFAULT_N_CRITICAL
    sweep_modes: tuple = ALL_MODES
    sweep_strategies: tuple = (SlotStrategy.RANDOM,)
    sweep_policies: tuple = (EcuPolicy.RANDOM,)
    sweep_seeds: object = 20
    failsim: FailSimConfig = field(default_factory=FailSimConfig)

    def workload(self):
        if self.apps is not None:
            return list(self.apps)
        return generate_synthetic(self.n_apps, self.n_critical, self.tasks_per_app,
                                  self.slot_demand, self.seed)

    def map(self, seed=None):
        """Map the configured workload once, honouring pinned placements."""
        seed = self.seed if seed is None else seed
        apps = self.workload()
        if self.placements:
            return map_fixed(apps, self.topology, self.placements, self.mode, self.strategy, seed)
        return map_system(apps, self.topology, self.strategy, self.policy, self.mode, seed,
                          mapping_order=self.mapping_order, budget=self.budget,
                          scenario_attempts=self.scenario_attempts)

    def seeds(self, base=None):
        base = self.seed if base is None else base
        if isinstance(self.sweep_seeds, int):
            return tuple(range(base, base + self.sweep_seeds))
        return tuple(self.sweep_seeds)

    def scenario(self, base_seed=None) -> ScenarioConfig:
        return ScenarioConfig(
            topology=self.topology, n_apps=self.n_apps, n_critical=tuple(self.sweep_n_critical),
            tasks_per_app=self.tasks_per_app, slot_demand=self.slot_demand,
            failure_rate=self.failure_rate, strategies=self.sweep_strategies,
            policies=self.sweep_policies, modes=self.sweep_modes, seeds=self.seeds(base_seed),
            mapping_order=self.mapping_order, scenario_attempts=self.scenario_attempts,
            budget=self.budget,
        )


def _enum_list(values, enum, key):
    if isinstance(values, str):
        values = [values]
    try:
        return tuple(enum(v) for v in values)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _enum(value, enum, key):
    try:
        return enum(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def settings_from_dict(doc: dict) -> Settings:
    s = Settings()
    try:
        s.seed = int(doc.get("seed", 0))
        s.failure_rate = float(doc.get("failure_rate", 0.01))
        platform = doc.get("platform", {"preset": "paper_10x175"})
        platform = {"failure_rate": s.failure_rate, **platform}
        s.topology = topology_from_config(platform)

        w = doc.get("workload", {})
        s.n_apps = int(w.get("n_apps", s.n_apps))
        s.n_critical = int(w.get("n_critical", s.n_critical))
        s.tasks_per_app = int(w.get("tasks_per_app", s.tasks_per_app))
        s.slot_demand = int(w.get("slot_demand", s.slot_demand))
        if "apps" in doc:
            s.apps = applications_from_config(doc["apps"])
            s.n_apps = len(s.apps)
            s.n_critical = sum(a.critical for a in s.apps)
            for item, app in zip(doc["apps"], s.apps):
                pinned = {k: item[k] for k in _PLACEMENT_KEYS if k in item}
                if pinned:
                    s.placements[app.id] = pinned

        m = doc.get("mapping", {})
        s.mode = _enum(m.get("mode", s.mode), RedundancyMode, "mapping.mode")
        s.strategy = _enum(m.get("strategy", s.strategy), SlotStrategy, "mapping.strategy")
        s.policy = _enum(m.get("policy", s.policy), EcuPolicy, "mapping.policy")
        s.mapping_order = m.get("mapping_order", doc.get("mapping_order", SHUFFLED))
        if s.mapping_order not in (SHUFFLED, CRITICAL_FIRST):
            raise ConfigError(f"mapping_order must be {SHUFFLED!r} or {CRITICAL_FIRST!r}")
        s.scenario_attempts = int(m.get("scenario_attempts", s.scenario_attempts))
        s.budget = int(m.get("budget", s.budget))

        sw = doc.get("sweep", {})
        s.sweep_n_critical = tuple(int(x) for x in sw.get("n_critical", DEFAULT_N_CRITICAL))
        s.sweep_modes = _enum_list(sw.get("modes", [x.value for x in ALL_MODES]),
                                   RedundancyMode, "sweep.modes")
        s.sweep_strategies = _enum_list(sw.get("strategies", ["random"]), SlotStrategy,
                                        "sweep.strategies")
        s.sweep_policies = _enum_list(sw.get("policies", ["random"]), EcuPolicy, "sweep.policies")
        seeds = sw.get("seeds", 20)
        s.sweep_seeds = int(seeds) if isinstance(seeds, int) else [int(x) for x in seeds]

        f = doc.get("failsim", {})
        s.failsim = FailSimConfig(float(f.get("heartbeat_period", 10.0)),
                                  float(f.get("watchdog_timeout", 30.0)))
    except (TypeError, KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config value: {exc}") from None
    if s.failsim.heartbeat_period <= 0 or s.failsim.watchdog_timeout <= 0:
        raise ConfigError("failsim constants must be positive")
    return s


def load(path) -> Settings:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return settings_from_dict(doc)
