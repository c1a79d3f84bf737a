"""Command-line entry point: ``degradelab <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile

from . import config as config_mod
from .errors import DegradeLabError
from .experiment import limits_table, rows_to_csv, run_sweep
from .failsim import oracle_check, simulate_failures
from .reliability import mttf
from .structfn import build_all, coupling_set
from .workload import ACTIVE

SEED_ENV = "DEGRADELAB_SEED"


def _table(header, records, delimiter) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(header)
    w.writerows(records)
    return buf.getvalue()


def _num(x):
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def write_output(text, path):
    """Write ``text`` to ``path`` atomically, or to stdout when no path."""
    if not path:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".degradelab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _settings(args):
    s = config_mod.load(args.config) if args.config else config_mod.Settings()
    if args.seed is not None:
        s.seed = args.seed
    return s


def cmd_generate(args, s):
    rows = [(a.id, a.criticality, len(a.tasks), " ".join(str(t.slot_demand) for t in a.tasks),
             " ".join(f"{p}>{c}" for p, c in a.messages)) for a in s.workload()]
    return _table(("app", "criticality", "tasks", "slot_demand", "messages"), rows, args.delim)


def _mapped(s):
    system = s.map()
    if not system.ok:
        failed = ", ".join(f"a{a}" for a in sorted(system.failures))
        raise DegradeLabError(f"mapping infeasible; unmapped applications: {failed}")
    return system


def cmd_map(args, s):
    system = _mapped(s)
    rows = []
    for app_id in sorted(system.mappings):
        m = system.mappings[app_id]
        for inst, (e, slots, lane) in sorted(m.slot_assignments.items()):
            rows.append((app_id, inst.task, inst.kind, e, lane, " ".join(map(str, slots))))
    return _table(("app", "task", "kind", "ecu", "lane", "slots"), rows, args.delim)


def cmd_analyze(args, s):
    system = _mapped(s)
    sfs = build_all(system)
    rows = []
    for app_id, sf in sfs.items():
        g = system.graphs[app_id]
        res = mttf(sf, s.failure_rate)
        coupling = [len(coupling_set(g.active(t.id), system.table)) for t in g.application.tasks]
        rows.append((app_id, g.application.criticality, " ".join(map(str, sorted(sf.support))),
                     sf.size, _num(res.analytic), _num(res.numeric),
                     " ".join(map(str, coupling))))
    header = ("app", "criticality", "support", "bdd_nodes", "mttf_analytic", "mttf_numeric",
              "coupling_sizes")
    return _table(header, rows, args.delim)


def cmd_sweep(args, s):
    rows = run_sweep(s.scenario(), jobs=args.jobs)
    return rows_to_csv(rows, args.delim)


def cmd_simulate(args, s):
    system = _mapped(s)
    n = system.table.n_ecus
    failed = args.fail
    for e in failed:
        if not 0 <= e < n:
            args.parser.error(f"unknown ECU id {e} (platform has e0..e{n - 1})")
    outcome = simulate_failures(system, [(e, args.at) for e in failed], s.failsim)
    rows = [(a, system.graphs[a].application.criticality, outcome.status[a])
            for a in sorted(outcome.status)]
    text = _table(("app", "criticality", "status"), rows, args.delim)
    text += "\n# trace: time kind subject detail\n" + outcome.trace_text()
    if len(failed) == 1:
        ok = oracle_check(system, failed[0], config=s.failsim)
        text += f"\n# oracle_check {'true' if ok else 'false'}\n"
    return text


def cmd_limits(args, s):
    rows = limits_table(s.n_apps, s.sweep_n_critical, s.tasks_per_app, s.slot_demand)
    return _table(("n_critical", "lower", "upper", "active", "no_redundancy"), rows, args.delim)


def _ecu_list(text):
    try:
        return [int(x.strip().lstrip("e")) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ECU list: {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML scenario document")
    common.add_argument("--seed", type=int, help=f"base seed (overridden by ${SEED_ENV})")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "tsv"), default="csv")

    parser = argparse.ArgumentParser(prog="degradelab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, text in (
        ("generate", cmd_generate, "print the workload"),
        ("map", cmd_map, "map one scenario and list slot assignments"),
        ("analyze", cmd_analyze, "per-application structure function and MTTF report"),
        ("sweep", cmd_sweep, "run the configured parameter sweep"),
        ("simulate", cmd_simulate, "inject ECU failures into one mapped scenario"),
        ("limits", cmd_limits, "closed-form slot consumption bounds"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=func, parser=p)
        if name == "sweep":
            p.add_argument("--jobs", type=int, default=1, help="worker processes")
        if name == "simulate":
            p.add_argument("--fail", type=_ecu_list, required=True, metavar="ECU[,ECU...]")
            p.add_argument("--at", type=float, default=0.0, metavar="TIME")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            args.seed = int(env_seed)
        except ValueError:
            parser.error(f"{SEED_ENV} must be an integer")
    args.delim = "\t" if args.format == "tsv" else ","
    if getattr(args, "at", 0.0) < 0:
        args.parser.error("--at must be non-negative")
    try:
        settings = _settings(args)
        text = args.func(args, settings)
        write_output(text, args.out)
    except DegradeLabError as exc:
        print(f"degradelab: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"degradelab: error: {exc}", file=sys.stderr)
        return 1
    return 0
