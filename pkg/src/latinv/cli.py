"""Command-line operator surface.

Subcommands:

    attack        train against each target label, write reports
    eval          metric sheet for a stored distribution file
    bench-agents  centralized vs independent critics over shared seeds
    oracle-serve  expose a builtin oracle over stdio (newline JSON)
    gradcheck     finite-difference audit of the network gradients
    sweep-dims    repeat the attack across latent dimensions

Exit codes: 0 success, 2 bad configuration, 3 oracle unreachable or
misbehaving, 4 oracle/config dimension mismatch, 1 internal error. Every
command validates its whole configuration before contacting any oracle.

Output layout under --out: <out>/<label>/report.json, rewards.csv and
eval.json per attacked label; bench and sweep additionally write bench.csv
or sweep.csv at the top level. Files are written atomically and carry no
timestamps, so identical configs and seeds reproduce them byte for byte.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback
from dataclasses import replace

from .config import (
    RunConfig,
    atomic_write_json,
    atomic_write_text,
    build_oracle,
    dump_json,
    format_csv,
    load_distribution,
    load_run_config,
    oracle_spec_for_dim,
)
from .errors import (
    ConfigError,
    OracleMismatchError,
    OracleUnavailableError,
    ProtocolError,
)
from .evaluation import EvalSummary, eval_rng, evaluate_distribution
from .distributions import LatentDistribution
from .nn import gradient_check
from .oracles import OracleHandle
from .protocol import serve
from .training import (
    STATUS_COMPLETED,
    AttackReport,
    run_attack,
)

GRADCHECK_TOLERANCE = 1e-4
DEFAULT_SWEEP_DIMS = (4, 8, 16, 32, 64)
REWARDS_CSV_COLUMNS = [
    "episode",
    "R_mu",
    "R_sigma",
    "r_next",
    "r_a",
    "r_mu",
    "r_sigma",
    "r_c",
    "alpha",
    "noise",
    "queries",
]


def _parse_int_list(text: str, what: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part != "")
    except ValueError as exc:
        raise ConfigError(f"{what} must be an integer or comma-separated list: {text!r}") from exc
    if not values:
        raise ConfigError(f"{what} must name at least one value")
    return values


def _parse_oracle_flag(text: str) -> dict:
    if text == "builtin":
        return {"kind": "testbed"}
    if text.startswith("cmd:") or text.startswith("tcp:"):
        return {"kind": "external", "endpoint": text}
    raise ConfigError(
        f"--oracle must be 'builtin', 'cmd:...', or 'tcp:host:port', got {text!r}"
    )


def _load_config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config) if args.config else RunConfig()
    return config.with_overrides(
        labels=_parse_int_list(args.label, "--label") if args.label else None,
        seed=args.seed,
        mode=args.mode,
        out_dir=args.out,
        oracle=_parse_oracle_flag(args.oracle) if args.oracle else None,
    )


def _rewards_csv(report: AttackReport) -> str:
    rows = [[row[col] for col in REWARDS_CSV_COLUMNS] for row in report.episodes]
    return format_csv(REWARDS_CSV_COLUMNS, rows)


def _evaluate_final(
    report: AttackReport, oracle: OracleHandle, config: RunConfig
) -> EvalSummary | None:
    if report.final is None:
        return None
    dist = LatentDistribution.from_dict(report.final)
    return evaluate_distribution(
        dist,
        oracle,
        report.label,
        eval_rng(report.seed, report.label),
        accuracy_samples=config.metrics.accuracy_samples,
        ranking_samples=config.metrics.ranking_samples,
        thresholds=config.metrics.thresholds,
    )


def _write_run_artifacts(
    out_dir: str, report: AttackReport, summary: EvalSummary | None
) -> None:
    base = os.path.join(out_dir, str(report.label))
    payload = report.to_dict()
    payload["eval"] = summary.to_dict() if summary is not None else None
    atomic_write_json(os.path.join(base, "report.json"), payload)
    atomic_write_text(os.path.join(base, "rewards.csv"), _rewards_csv(report))
    if summary is not None:
        atomic_write_json(os.path.join(base, "eval.json"), summary.to_dict())


def cmd_attack(args: argparse.Namespace) -> int:
    config = _load_config(args)
    oracle = build_oracle(config.oracle)
    try:
        for label in config.labels:
            report = run_attack(config.trainer, oracle, label)
            summary = None
            if report.status == STATUS_COMPLETED:
                summary = _evaluate_final(report, oracle, config)
            _write_run_artifacts(config.out_dir, report, summary)
            if report.status != STATUS_COMPLETED:
                print(
                    f"label {label}: run failed after {len(report.episodes)} episodes: {report.error}",
                    file=sys.stderr,
                )
                return 3
            print(
                f"label {label}: {len(report.episodes)} episodes, "
                f"{report.queries['total']} queries"
                + (
                    f", final accuracy {summary.distributional_accuracy}"
                    if summary is not None
                    else ""
                )
            )
    finally:
        oracle.close()
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = _load_config(args)
    dist = load_distribution(args.distribution)
    label = config.labels[0]
    oracle = build_oracle(config.oracle)
    try:
        if dist.dim != oracle.latent_dim:
            raise OracleMismatchError(
                f"distribution has dimension {dist.dim}, oracle expects {oracle.latent_dim}"
            )
        summary = evaluate_distribution(
            dist,
            oracle,
            label,
            eval_rng(config.trainer.seed, label),
            accuracy_samples=config.metrics.accuracy_samples,
            ranking_samples=config.metrics.ranking_samples,
            thresholds=config.metrics.thresholds,
        )
    finally:
        oracle.close()
    text = dump_json(summary.to_dict())
    if args.out:
        atomic_write_text(os.path.join(args.out, "eval.json"), text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench_agents(args: argparse.Namespace) -> int:
    config = _load_config(args)
    seeds = [config.trainer.seed + i for i in range(args.runs)]
    header = ["mode", "seed", "label", "accuracy", "mean_R_mu", "mean_R_sigma"]
    rows: list[list[object]] = []
    oracle = build_oracle(config.oracle)
    try:
        for mode in ("maddpg", "independent"):
            for seed in seeds:
                for label in config.labels:
                    trainer = replace(config.trainer, seed=seed, mode=mode)
                    report = run_attack(trainer, oracle, label)
                    tag = f"{mode}-s{seed}-l{label}"
                    atomic_write_text(
                        os.path.join(config.out_dir, f"{tag}-rewards.csv"),
                        _rewards_csv(report),
                    )
                    if report.status != STATUS_COMPLETED:
                        print(f"{tag}: run failed: {report.error}", file=sys.stderr)
                        return 3
                    summary = _evaluate_final(report, oracle, config)
                    accuracy = summary.distributional_accuracy if summary else 0.0
                    tail = report.episodes[-max(1, len(report.episodes) // 10) :]
                    mean_mu = sum(r["R_mu"] for r in tail) / len(tail)
                    mean_sigma = sum(r["R_sigma"] for r in tail) / len(tail)
                    rows.append([mode, seed, label, accuracy, mean_mu, mean_sigma])
                    print(f"{tag}: accuracy {accuracy}, mean final reward {mean_mu}, {mean_sigma}")
    finally:
        oracle.close()
    atomic_write_text(os.path.join(config.out_dir, "bench.csv"), format_csv(header, rows))
    by_mode: dict[str, list[float]] = {"maddpg": [], "independent": []}
    for row in rows:
        by_mode[str(row[0])].append(float(row[3]))
    for mode, accs in by_mode.items():
        print(f"{mode}: mean accuracy {sum(accs) / len(accs)} over {len(accs)} runs")
    return 0


def cmd_oracle_serve(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if config.oracle.get("kind") == "external":
        raise ConfigError("oracle-serve exposes builtin oracles only, not external endpoints")
    oracle = build_oracle(config.oracle)
    try:
        serve(oracle)
    finally:
        oracle.close()
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    result = gradient_check(trials=args.trials, corrupt_layer=args.corrupt_layer)
    print(f"gradcheck over {args.trials} nets: {result}")
    if result.worst <= GRADCHECK_TOLERANCE:
        print(f"PASS (tolerance {GRADCHECK_TOLERANCE})")
        return 0
    print(f"FAIL (tolerance {GRADCHECK_TOLERANCE})")
    return 1


def cmd_sweep_dims(args: argparse.Namespace) -> int:
    config = _load_config(args)
    dims = _parse_int_list(args.dims, "--dims") if args.dims else DEFAULT_SWEEP_DIMS
    header = ["dimension", "seed", "accuracy"]
    rows: list[list[object]] = []
    for dim in dims:
        oracle = build_oracle(oracle_spec_for_dim(config.oracle, dim))
        try:
            trainer = replace(config.trainer, latent_dim=dim)
            accuracies = []
            for label in config.labels:
                report = run_attack(trainer, oracle, label)
                summary = None
                if report.status == STATUS_COMPLETED:
                    summary = _evaluate_final(report, oracle, config)
                _write_run_artifacts(
                    os.path.join(config.out_dir, f"dim-{dim}"), report, summary
                )
                if report.status != STATUS_COMPLETED:
                    print(f"dim {dim} label {label}: run failed: {report.error}", file=sys.stderr)
                    return 3
                accuracies.append(summary.distributional_accuracy if summary else 0.0)
        finally:
            oracle.close()
        accuracy = sum(accuracies) / len(accuracies)
        rows.append([dim, config.trainer.seed, accuracy])
        print(f"dimension {dim}: accuracy {accuracy}")
    atomic_write_text(os.path.join(config.out_dir, "sweep.csv"), format_csv(header, rows))
    return 0


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="run config JSON path")
    parser.add_argument("--out", help="output directory (overrides config out_dir)")
    parser.add_argument("--label", help="target label or comma-separated list")
    parser.add_argument("--seed", type=int, help="training seed override")
    parser.add_argument("--mode", choices=["maddpg", "independent"], help="critic wiring")
    parser.add_argument(
        "--oracle", help="oracle override: builtin, cmd:<command>, or tcp:host:port"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latinv",
        description="Latent-distribution search against query-only classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="train agents against each target label")
    _add_common_flags(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("eval", help="evaluate a stored distribution file")
    p.add_argument("distribution", help="distribution JSON path ({mu, sigma})")
    _add_common_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench-agents", help="compare centralized vs independent critics")
    _add_common_flags(p)
    p.add_argument("--runs", type=int, default=5, help="seeds per mode (default 5)")
    p.set_defaults(func=cmd_bench_agents)

    p = sub.add_parser("oracle-serve", help="serve a builtin oracle over stdio")
    _add_common_flags(p)
    p.set_defaults(func=cmd_oracle_serve)

    p = sub.add_parser("gradcheck", help="audit analytic gradients against finite differences")
    p.add_argument("--trials", type=int, default=20, help="number of randomized nets")
    p.add_argument("--corrupt-layer", type=int, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("sweep-dims", help="repeat the attack across latent dimensions")
    _add_common_flags(p)
    p.add_argument("--dims", help="comma-separated dimensions (default 4,8,16,32,64)")
    p.set_defaults(func=cmd_sweep_dims)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OracleUnavailableError, ProtocolError) as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return 3
    except OracleMismatchError as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return 4
    except KeyboardInterrupt:
        return 1
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
