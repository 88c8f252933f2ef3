"""Run configuration files and the on-disk artifact formats.

A run config is a single JSON object with up to five sections: "trainer"
(training hyperparameters), "oracle" (which oracle to attack and how to
reach it), "labels" (one target class or a list), "out_dir", and "metrics"
(sample counts for evaluation). Unknown fields are rejected at every level
so typos fail loudly before anything runs, and oracle specs are validated
structurally before any connection attempt.

Artifacts round-trip: everything the tool writes (report JSON, eval JSON,
reward CSV, bench/sweep CSV) is re-readable by the loaders here. Files are
written atomically (temp file, then rename) and contain no timestamps, so
a rerun with the same config and seed reproduces them byte for byte.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigError, InputError
from .distributions import LatentDistribution
from .oracles import (
    DEFAULT_LATENT_DIM,
    DEFAULT_NUM_CLASSES,
    DEFAULT_TEMPERATURE,
    DEFAULT_TESTBED_SEED,
    LinearSoftmaxOracle,
    LinearSoftmaxSpec,
    OracleHandle,
    PrototypeOracle,
    PrototypeOracleSpec,
    connect_external,
    make_testbed_oracle,
)
from .training import AttackReport, TrainerConfig

ORACLE_KIND_TESTBED = "testbed"
ORACLE_KIND_PROTOTYPE = "prototype"
ORACLE_KIND_LINEAR = "linear-softmax"
ORACLE_KIND_EXTERNAL = "external"

_ORACLE_FIELDS = {
    ORACLE_KIND_TESTBED: {"kind", "latent_dim", "num_classes", "seed", "temperature"},
    ORACLE_KIND_PROTOTYPE: {"kind", "prototypes", "temperature"},
    ORACLE_KIND_LINEAR: {"kind", "weights", "bias"},
    ORACLE_KIND_EXTERNAL: {"kind", "endpoint", "timeout"},
}


def validate_oracle_spec(payload: dict) -> dict:
    """Structural check of an oracle section; never contacts anything."""
    if not isinstance(payload, dict):
        raise ConfigError(f"oracle must be an object, got {type(payload).__name__}")
    kind = payload.get("kind")
    if kind not in _ORACLE_FIELDS:
        known = ", ".join(sorted(_ORACLE_FIELDS))
        raise ConfigError(f"oracle.kind must be one of {known}, got {kind!r}")
    unknown = sorted(set(payload) - _ORACLE_FIELDS[kind])
    if unknown:
        raise ConfigError(f"unknown oracle fields for kind {kind!r}: {', '.join(unknown)}")
    if kind == ORACLE_KIND_TESTBED:
        for name, low in (("latent_dim", 1), ("num_classes", 2), ("seed", 0)):
            value = payload.get(name)
            if value is not None and (not isinstance(value, int) or value < low):
                raise ConfigError(f"oracle.{name} must be an integer >= {low}, got {value!r}")
    elif kind == ORACLE_KIND_PROTOTYPE:
        if "prototypes" not in payload:
            raise ConfigError("oracle of kind 'prototype' needs a prototypes array")
    elif kind == ORACLE_KIND_LINEAR:
        if "weights" not in payload or "bias" not in payload:
            raise ConfigError("oracle of kind 'linear-softmax' needs weights and bias")
    elif kind == ORACLE_KIND_EXTERNAL:
        endpoint = payload.get("endpoint")
        if not isinstance(endpoint, str) or not (
            endpoint.startswith("cmd:") or endpoint.startswith("tcp:")
        ):
            raise ConfigError(
                f"oracle.endpoint must start with 'cmd:' or 'tcp:', got {endpoint!r}"
            )
    return payload


def build_oracle(payload: dict) -> OracleHandle:
    """Construct the oracle a validated spec describes; may connect out."""
    spec = validate_oracle_spec(payload)
    kind = spec["kind"]
    if kind == ORACLE_KIND_TESTBED:
        return make_testbed_oracle(
            latent_dim=spec.get("latent_dim", DEFAULT_LATENT_DIM),
            num_classes=spec.get("num_classes", DEFAULT_NUM_CLASSES),
            seed=spec.get("seed", DEFAULT_TESTBED_SEED),
            temperature=spec.get("temperature", DEFAULT_TEMPERATURE),
        )
    if kind == ORACLE_KIND_PROTOTYPE:
        try:
            protos = np.asarray(spec["prototypes"], dtype=np.float64)
        except ValueError as exc:
            raise ConfigError(f"bad prototypes array: {exc}") from exc
        try:
            return PrototypeOracle(
                PrototypeOracleSpec(protos, spec.get("temperature", DEFAULT_TEMPERATURE))
            )
        except InputError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == ORACLE_KIND_LINEAR:
        try:
            weights = np.asarray(spec["weights"], dtype=np.float64)
            bias = np.asarray(spec["bias"], dtype=np.float64)
            return LinearSoftmaxOracle(LinearSoftmaxSpec(weights, bias))
        except (ValueError, InputError) as exc:
            raise ConfigError(f"bad linear-softmax oracle: {exc}") from exc
    return connect_external(spec["endpoint"], timeout=spec.get("timeout", 10.0))


def oracle_spec_for_dim(payload: dict, latent_dim: int) -> dict:
    """The same oracle family at a different latent dimension (sweeps)."""
    if payload.get("kind") != ORACLE_KIND_TESTBED:
        raise ConfigError(
            "dimension sweeps need the seeded 'testbed' oracle; "
            f"got kind {payload.get('kind')!r}"
        )
    out = dict(payload)
    out["latent_dim"] = latent_dim
    return out


@dataclass(frozen=True)
class MetricSettings:
    """Sample counts and thresholds for the evaluation sheet."""

    accuracy_samples: int = 500
    ranking_samples: int = 10_000
    thresholds: tuple[float, ...] = (0.5, 0.75, 0.9)

    def __post_init__(self) -> None:
        if self.accuracy_samples < 1 or self.ranking_samples < 1:
            raise ConfigError("metric sample counts must be >= 1")
        if any(t2 <= t1 for t1, t2 in zip(self.thresholds, self.thresholds[1:])):
            raise ConfigError(f"thresholds must be strictly ascending, got {self.thresholds}")

    def to_dict(self) -> dict:
        return {
            "accuracy_samples": self.accuracy_samples,
            "ranking_samples": self.ranking_samples,
            "thresholds": list(self.thresholds),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "MetricSettings":
        if not isinstance(payload, dict):
            raise ConfigError("metrics must be an object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"unknown metrics fields: {', '.join(unknown)}")
        kwargs = dict(payload)
        if "thresholds" in kwargs:
            kwargs["thresholds"] = tuple(kwargs["thresholds"])
        return cls(**kwargs)


@dataclass(frozen=True)
class RunConfig:
    """One attack campaign: trainer settings, oracle, targets, outputs."""

    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    oracle: dict = field(default_factory=lambda: {"kind": ORACLE_KIND_TESTBED})
    labels: tuple[int, ...] = (0,)
    out_dir: str = "runs"
    metrics: MetricSettings = field(default_factory=MetricSettings)

    def __post_init__(self) -> None:
        validate_oracle_spec(self.oracle)
        if not self.labels:
            raise ConfigError("labels must name at least one target class")
        if any((not isinstance(l, int)) or l < 0 for l in self.labels):
            raise ConfigError(f"labels must be non-negative integers, got {self.labels}")
        if len(set(self.labels)) != len(self.labels):
            raise ConfigError(f"labels contain duplicates: {self.labels}")

    def to_dict(self) -> dict:
        return {
            "trainer": self.trainer.to_dict(),
            "oracle": dict(self.oracle),
            "labels": list(self.labels),
            "out_dir": self.out_dir,
            "metrics": self.metrics.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RunConfig":
        if not isinstance(payload, dict):
            raise ConfigError(f"run config must be an object, got {type(payload).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"unknown run config fields: {', '.join(unknown)}")
        kwargs: dict = {}
        if "trainer" in payload:
            try:
                kwargs["trainer"] = TrainerConfig.from_dict(payload["trainer"])
            except ConfigError as exc:
                raise ConfigError(f"trainer: {exc}") from exc
        if "oracle" in payload:
            try:
                kwargs["oracle"] = validate_oracle_spec(payload["oracle"])
            except ConfigError as exc:
                raise ConfigError(f"oracle: {exc}") from exc
        if "labels" in payload:
            raw = payload["labels"]
            kwargs["labels"] = (raw,) if isinstance(raw, int) else tuple(raw)
        if "out_dir" in payload:
            if not isinstance(payload["out_dir"], str):
                raise ConfigError("out_dir must be a string")
            kwargs["out_dir"] = payload["out_dir"]
        if "metrics" in payload:
            try:
                kwargs["metrics"] = MetricSettings.from_dict(payload["metrics"])
            except ConfigError as exc:
                raise ConfigError(f"metrics: {exc}") from exc
        return cls(**kwargs)

    def with_overrides(
        self,
        labels: tuple[int, ...] | None = None,
        seed: int | None = None,
        mode: str | None = None,
        out_dir: str | None = None,
        oracle: dict | None = None,
    ) -> "RunConfig":
        """Command-line overrides on top of a loaded config."""
        trainer = self.trainer
        if seed is not None:
            trainer = replace(trainer, seed=seed)
        if mode is not None:
            trainer = replace(trainer, mode=mode)
        return RunConfig(
            trainer=trainer,
            oracle=oracle if oracle is not None else self.oracle,
            labels=labels if labels is not None else self.labels,
            out_dir=out_dir if out_dir is not None else self.out_dir,
            metrics=self.metrics,
        )


# -- file I/O ----------------------------------------------------------------


def load_json_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path} is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from exc


def load_run_config(path: str) -> RunConfig:
    try:
        return RunConfig.from_dict(load_json_file(path))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_distribution(path: str) -> LatentDistribution:
    payload = load_json_file(path)
    try:
        return LatentDistribution.from_dict(payload)
    except InputError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_report(path: str) -> AttackReport:
    payload = load_json_file(path)
    try:
        return AttackReport.from_dict(payload)
    except KeyError as exc:
        raise ConfigError(f"{path}: report is missing field {exc}") from exc


def atomic_write_text(path: str, text: str) -> None:
    """Write-temp-then-rename so readers never observe a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def dump_json(payload: dict) -> str:
    # allow_nan=False turns any stray non-finite value into a loud failure
    # instead of silently emitting non-JSON.
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def atomic_write_json(path: str, payload: dict) -> None:
    atomic_write_text(path, dump_json(payload))


def format_cell(value: object) -> str:
    """CSV cell formatting: floats use the shortest round-trip repr."""
    if isinstance(value, bool):
        raise InputError("CSV cells are numeric or string, not boolean")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        if "," in value or "\n" in value:
            raise InputError(f"CSV cell may not contain separators: {value!r}")
        return value
    raise InputError(f"unsupported CSV cell type: {type(value).__name__}")


def format_csv(header: list[str], rows: list[list[object]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise InputError(f"CSV row width {len(row)} != header width {len(header)}")
        lines.append(",".join(format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def load_csv(path: str) -> tuple[list[str], list[list[float | str]]]:
    """Read back a CSV written by this tool: header plus typed rows."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise ConfigError(f"{path}: empty CSV")
    header = lines[0].split(",")
    rows: list[list[float | str]] = []
    for line in lines[1:]:
        cells: list[float | str] = []
        for cell in line.split(","):
            try:
                cells.append(float(cell))
            except ValueError:
                cells.append(cell)
        rows.append(cells)
    return header, rows
