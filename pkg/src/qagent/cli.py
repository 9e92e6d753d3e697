"""Command-line interface.

Subcommands:

* ``train TASK``    - train a registry task and write artifacts
* ``eval TASK``     - score a saved parameter vector
* ``report``        - tabulate training summaries in a directory
* ``analyze``       - inspect a saved circuit dump (fidelity, QASM, prune)
* ``defaults``      - print task defaults as config key=value lines

Configuration is flat ``key=value`` pairs, read from an optional file
(``--config``) and overridable on the command line; artifact files
contain no timestamps, so identical runs produce identical bytes.  Exit
codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, defaults, pqc, qasm, trainer
from .tasks import qft


class UsageError(Exception):
    pass


_CONFIG_KEYS = ("epochs", "learning_rate", "lr_decay", "seed", "optimizer",
                "init", "init_scale", "n_seeds")


def _parse_kv(pairs):
    out = {}
    for item in pairs:
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        if k not in _CONFIG_KEYS:
            raise UsageError(f"unknown config key {k!r}; valid keys: "
                             + ", ".join(_CONFIG_KEYS))
        out[k] = v
    return out


def _load_config_file(path):
    out = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{ln}: expected key=value")
        k, v = line.split("=", 1)
        if k.strip() not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{ln}: unknown config key {k.strip()!r}")
        out[k.strip()] = v.strip()
    return out


def _apply_overrides(cfg: trainer.TrainConfig, kv: dict):
    n_seeds = None
    for k, v in kv.items():
        try:
            if k == "epochs":
                cfg = replace(cfg, epochs=int(v))
            elif k == "learning_rate":
                cfg = replace(cfg, learning_rate=float(v))
            elif k == "lr_decay":
                cfg = replace(cfg, lr_decay=float(v))
            elif k == "seed":
                cfg = replace(cfg, seed=int(v))
            elif k == "optimizer":
                cfg = replace(cfg, optimizer=v)
            elif k == "init":
                if v != "zeros":
                    raise UsageError(
                        "init accepts only 'zeros'; use init_scale for "
                        "uniform initialization")
                cfg = replace(cfg, init="zeros")
            elif k == "init_scale":
                cfg = replace(cfg, init=("uniform", float(v)))
            elif k == "n_seeds":
                n_seeds = int(v)
        except ValueError as exc:
            raise UsageError(f"bad value for {k}: {exc}") from exc
    return cfg, n_seeds


def _config_lines(spec, cfg: trainer.TrainConfig):
    init = cfg.init
    lines = [f"epochs={cfg.epochs}", f"learning_rate={cfg.learning_rate}",
             f"lr_decay={cfg.lr_decay}", f"seed={cfg.seed}",
             f"optimizer={cfg.optimizer}"]
    if isinstance(init, str):
        lines.append(f"init={init}")
    elif init[0] in ("uniform", "masked"):
        if init[0] == "masked":
            lines.append("init=masked")
        lines.append(f"init_scale={init[1]}")
    if spec.n_seeds > 1:
        lines.append(f"n_seeds={spec.n_seeds}")
    return lines


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_train(args):
    spec = defaults.get(args.task)
    kv = {}
    if args.config:
        kv.update(_load_config_file(args.config))
    kv.update(_parse_kv(args.set or []))
    cfg, n_seeds = _apply_overrides(spec.config, kv)
    if n_seeds is not None:
        spec = replace(spec, n_seeds=n_seeds)

    records = {}
    record = defaults.run_task(args.task, config=cfg, records=records)
    metrics = defaults.task_metric(spec, record)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / f"{args.task}.log").write_text(record.log_text())
    (outdir / f"{args.task}.params").write_text(
        "\n".join(repr(float(v)) for v in record.final_params) + "\n")
    summary = [f"task={args.task}", f"final_reward={record.final_reward!r}",
               f"optimal={spec.optimal!r}"]
    summary += [f"{k}={v!r}" for k, v in metrics.items()]
    summary += _config_lines(spec, cfg)
    (outdir / f"{args.task}.summary").write_text("\n".join(summary) + "\n")
    for label, text in defaults.circuit_dumps(spec, record).items():
        (outdir / f"{args.task}.{label}.circuit").write_text(text)

    print(f"task={args.task} final_reward={record.final_reward!r} "
          f"optimal={spec.optimal!r}")
    for k, v in metrics.items():
        print(f"{k}={v!r}")
    return 0


def _read_params(path):
    vals = [float(t) for t in Path(path).read_text().split()]
    return np.array(vals, dtype=np.float64)


def cmd_eval(args):
    spec = defaults.get(args.task)
    params = _read_params(args.params)
    objective = spec.build()
    if params.shape != (objective.n_params,):
        raise UsageError(f"task {args.task} needs {objective.n_params} "
                         f"parameters, file has {len(params)}")
    from . import grad
    reward = grad.reward_value(objective.reward_fn, params)
    print(f"task={args.task} reward={reward!r} optimal={spec.optimal!r}")
    rec = trainer.TrainRecord(np.zeros(0), np.zeros(0), params, reward,
                              spec.config, 0.0)
    for k, v in defaults.task_metric(spec, rec).items():
        print(f"{k}={v!r}")
    return 0


def cmd_report(args):
    rows = []
    for path in sorted(Path(args.dir).glob("*.summary")):
        kv = dict(line.split("=", 1)
                  for line in path.read_text().splitlines() if "=" in line)
        name = kv.get("task", path.stem)
        learned = {k: v for k, v in kv.items()
                   if k in ("reward", "payoff_a", "payoff_b", "final_reward")}
        metric_keys = [k for k in ("payoff_a", "payoff_b") if k in learned]
        if not metric_keys:
            metric_keys = ["final_reward"]
        for k in metric_keys:
            rows.append((name, k if k != "final_reward" else "reward",
                         float(learned[k]), float(kv.get("optimal", "nan"))))
    if not rows:
        print(f"no summaries found in {args.dir}")
        return 1
    widths = (max(len(r[0]) for r in rows), 9)
    print(f"{'task':<{widths[0]}}  {'metric':<{widths[1]}}  "
          f"{'learned':>10}  {'optimal':>10}")
    for name, metric, learned, optimal in rows:
        print(f"{name:<{widths[0]}}  {metric:<{widths[1]}}  "
              f"{learned:>10.6f}  {optimal:>10.6f}")
    return 0


def cmd_analyze(args):
    circuit, params = pqc.parse(Path(args.circuit).read_text())
    n = circuit.n_qubits
    print(f"qubits={n} gates={len(circuit.gates)} params={circuit.n_params}")
    print(f"gate_counts={pqc.gate_counts(circuit)}")
    if args.prune is not None:
        circuit, params = pqc.prune(circuit, params, args.prune)
        print(f"pruned: gates={len(circuit.gates)} params={circuit.n_params}")
    if args.target == "qft":
        u = analysis.reconstruct(circuit, params)
        target = qft.qft_matrix(n)
        print(f"mean_basis_fidelity={analysis.mean_basis_fidelity(target, u)!r}")
        phases, residual = analysis.diagonal_phase_factor(u, target)
        print("diagonal_phases=" + " ".join(f"{p:.6f}" for p in phases))
        print(f"diagonal_residual_fidelity={residual!r}")
    if args.unitary:
        u = analysis.reconstruct(circuit, params)
        print(analysis.format_matrix(u))
    if args.qasm:
        Path(args.qasm).write_text(qasm.to_qasm(circuit, params))
        print(f"wrote {args.qasm}")
    if args.out:
        Path(args.out).write_text(pqc.render(circuit, params))
        print(f"wrote {args.out}")
    return 0


def cmd_defaults(args):
    names = [args.task] if args.task else sorted(defaults.TASKS)
    for name in names:
        spec = defaults.get(name)
        print(f"# {name}: {spec.description}")
        for line in _config_lines(spec, spec.config):
            print(line)
        print(f"# optimal={spec.optimal!r}")
        if len(names) > 1:
            print()
    return 0


# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="qagent",
        description="train and inspect quantum-circuit agents")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a benchmark task")
    t.add_argument("task")
    t.add_argument("--config", help="key=value config file")
    t.add_argument("--out", default="runs", help="artifact directory")
    t.set_defaults(fn=cmd_train)

    e = sub.add_parser("eval", help="score a saved parameter vector")
    e.add_argument("task")
    e.add_argument("--params", required=True)
    e.set_defaults(fn=cmd_eval)

    r = sub.add_parser("report", help="tabulate training summaries")
    r.add_argument("--dir", default="runs")
    r.set_defaults(fn=cmd_report)

    a = sub.add_parser("analyze", help="inspect a saved circuit dump")
    a.add_argument("--circuit", required=True)
    a.add_argument("--target", choices=("qft",))
    a.add_argument("--prune", type=float, metavar="TOL")
    a.add_argument("--qasm", metavar="FILE")
    a.add_argument("--unitary", action="store_true")
    a.add_argument("--out", metavar="FILE",
                   help="write the (possibly pruned) circuit dump")
    a.set_defaults(fn=cmd_analyze)

    d = sub.add_parser("defaults", help="print task default configs")
    d.add_argument("task", nargs="?")
    d.set_defaults(fn=cmd_defaults)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    if args.command == "train":
        args.set = extras  # trailing key=value config overrides
    elif extras:
        parser.print_usage(sys.stderr)
        print(f"qagent: error: unrecognized arguments: {' '.join(extras)}",
              file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except (trainer.TrainingError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
