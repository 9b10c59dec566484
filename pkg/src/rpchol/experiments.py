"""Config-driven experiment harness with CSV / Markdown reporting.

A config names a matrix ensemble, a list of pivot rules, and a trial count.
Each trial builds one matrix (stream: seed + trial) shared by every rule, so
rule comparisons are paired; each (trial, rule) pair gets its own sampling
stream. Reports aggregate final residual-norm ratios per rule and norm.
"""

import csv
import io as _io
import json
from dataclasses import dataclass, field, fields

import numpy as np

from .cholesky import NORM_NAMES, run
from .generators import SPIRAL_SCALE, gaussian_kernel, spiral_points
from .generators import random_spd_spectrum
from .io import load_matrix
from .pivoting import parse_rule, rule_name
from .rng import stream_rng, trial_rng

EXPERIMENTS = ("diagonal", "random_spectrum", "spiral_kernel", "custom_matrix_file")

SPECTRA = {
    "1+i/100": lambda i: 1.0 + i / 100.0,
    "i": lambda i: float(i),
    "i^2": lambda i: float(i) ** 2,
    "i^3": lambda i: float(i) ** 3,
    "i^5": lambda i: float(i) ** 5,
    "1/i": lambda i: 1.0 / i,
}

SPIRAL_RULES = (
    "uniform",
    "gibbs:1",
    "gibbs:2",
    "greedy:last",
    "gibbs:20",
    "alt:greedy:last+uniform",
)


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending field."""


def spectrum_values(spec, n):
    """Resolve a named, callable, or explicit spectrum into n nonnegative values (1-based)."""
    if isinstance(spec, str):
        try:
            f = SPECTRA[spec]
        except KeyError:
            raise ConfigError(
                f"spectrum: unknown name {spec!r}; choose from {sorted(SPECTRA)} or give values"
            ) from None
        values = np.array([f(i) for i in range(1, n + 1)], dtype=float)
    elif callable(spec):
        values = np.array([float(spec(i)) for i in range(1, n + 1)], dtype=float)
    else:
        values = np.asarray(spec, dtype=float)
        if values.shape != (n,):
            raise ConfigError(f"spectrum: expected {n} values, got shape {values.shape}")
    if not np.all(np.isfinite(values)) or np.any(values < 0.0):
        raise ConfigError("spectrum: values must be finite and nonnegative")
    return values


@dataclass
class ExperimentConfig:
    experiment: str
    n: int = 100
    k: int = 50
    spectrum: object = None
    rules: tuple = ("gibbs:1",)
    trials: int = 1
    seed: int = 0
    norms: tuple = NORM_NAMES
    matrix_file: str = None
    bandwidth: float = 1000.0
    scale: float = SPIRAL_SCALE
    out: str = None
    format: str = "csv"

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: unknown kind {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.n < 1:
            raise ConfigError(f"n: must be >= 1, got {self.n}")
        if not (0 <= self.k <= self.n):
            raise ConfigError(f"k: must satisfy 0 <= k <= n, got k={self.k}, n={self.n}")
        if self.trials < 1:
            raise ConfigError(f"trials: must be >= 1, got {self.trials}")
        if not self.rules:
            raise ConfigError("rules: must be non-empty")
        for r in self.rules:
            try:
                parse_rule(r)
            except ValueError as exc:
                raise ConfigError(f"rules: {exc}") from None
        if not self.norms:
            raise ConfigError("norms: must be non-empty")
        for norm in self.norms:
            if norm not in NORM_NAMES:
                raise ConfigError(f"norms: unknown norm {norm!r}; choose from {NORM_NAMES}")
        if self.experiment in ("diagonal", "random_spectrum"):
            if self.spectrum is None:
                raise ConfigError(f"spectrum: required for the {self.experiment} experiment")
            spectrum_values(self.spectrum, self.n)
        if self.experiment == "custom_matrix_file" and not self.matrix_file:
            raise ConfigError("matrix_file: required for the custom_matrix_file experiment")
        if self.experiment == "spiral_kernel":
            if self.n % 2 != 0:
                raise ConfigError(f"n: spiral experiment needs an even n, got {self.n}")
            if not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
                raise ConfigError(f"bandwidth: must be positive, got {self.bandwidth}")
            if not (np.isfinite(self.scale) and self.scale > 0):
                raise ConfigError(f"scale: must be positive, got {self.scale}")
        if self.format not in ("csv", "markdown"):
            raise ConfigError(f"format: must be 'csv' or 'markdown', got {self.format!r}")
        return self

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("experiment: required")
        kwargs = dict(data)
        for key in ("rules", "norms"):
            if key in kwargs:
                value = kwargs[key]
                if isinstance(value, str):
                    raise ConfigError(f"{key}: must be a list, got a string")
                kwargs[key] = tuple(value)
        for key in ("n", "k", "trials", "seed"):
            if key in kwargs:
                try:
                    kwargs[key] = int(kwargs[key])
                except (TypeError, ValueError):
                    raise ConfigError(f"{key}: must be an integer") from None
        return cls(**kwargs).validate()

    @classmethod
    def from_json_file(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)


@dataclass
class AggregateRow:
    rule: str
    norm: str
    mean_ratio: float
    std_ratio: float
    trials: int


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    runs: list = field(default_factory=list)  # (rule spelling, trial, RunReport)
    aggregates: list = field(default_factory=list)


def build_matrix(config, trial):
    """The trial's shared matrix; random ensembles use the stream seed + trial."""
    if config.experiment == "diagonal":
        return np.diag(spectrum_values(config.spectrum, config.n))
    if config.experiment == "random_spectrum":
        values = spectrum_values(config.spectrum, config.n)
        return random_spd_spectrum(config.n, values, trial_rng(config.seed, trial))
    if config.experiment == "spiral_kernel":
        half = config.n // 2
        pts = spiral_points(
            n_total=config.n,
            cluster_split=(half, config.n - half),
            scale=config.scale,
            rng=trial_rng(config.seed, trial),
        )
        return gaussian_kernel(pts, bandwidth=config.bandwidth)
    if config.experiment == "custom_matrix_file":
        a = load_matrix(config.matrix_file)
        if a.shape[0] != config.n:
            raise ConfigError(
                f"n: matrix file has dimension {a.shape[0]}, config says {config.n}"
            )
        return a
    raise ConfigError(f"experiment: unknown kind {config.experiment!r}")


def _aggregate(config, runs):
    names = [rule_name(parse_rule(r)) for r in config.rules]
    rows = []
    for name in names:
        for norm in config.norms:
            ratios = [rep.ratios[norm] for rule, _, rep in runs if rule == name]
            mean = float(np.mean(ratios))
            std = float(np.std(ratios, ddof=1)) if len(ratios) > 1 else 0.0
            rows.append(AggregateRow(name, norm, mean, std, len(ratios)))
    return rows


def run_experiment(config):
    """Run every (trial, rule) pair and aggregate final norm ratios."""
    config.validate()
    rules = [parse_rule(r) for r in config.rules]
    names = [rule_name(r) for r in rules]
    runs = []
    for trial in range(config.trials):
        a = build_matrix(config, trial)
        for ridx, rule in enumerate(rules):
            report = run(
                a,
                rule,
                config.k,
                rng=stream_rng(config.seed, trial, ridx),
                seed=config.seed,
                engine="dense",
                norms=config.norms,
            )
            runs.append((names[ridx], trial, report))
    return ExperimentReport(config=config, runs=runs, aggregates=_aggregate(config, runs))


def spiral_experiment(config=None, **overrides):
    """Spiral-kernel comparison with the six standard rules (n=500, k=50)."""
    if config is None:
        defaults = dict(
            experiment="spiral_kernel",
            n=500,
            k=50,
            rules=SPIRAL_RULES,
            trials=1,
            seed=0,
            norms=NORM_NAMES,
        )
        defaults.update(overrides)
        config = ExperimentConfig(**defaults).validate()
    elif overrides:
        raise ValueError("pass either a config or overrides, not both")
    if config.experiment != "spiral_kernel":
        raise ConfigError(f"experiment: spiral_experiment needs 'spiral_kernel', got {config.experiment!r}")
    return run_experiment(config)


def report_csv(report):
    """CSV text: rule,norm,mean_ratio,std_ratio,trials,n,k,seed (17 significant digits)."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rule", "norm", "mean_ratio", "std_ratio", "trials", "n", "k", "seed"])
    cfg = report.config
    for row in report.aggregates:
        writer.writerow(
            [
                row.rule,
                row.norm,
                f"{row.mean_ratio:.17g}",
                f"{row.std_ratio:.17g}",
                row.trials,
                cfg.n,
                cfg.k,
                cfg.seed,
            ]
        )
    return buf.getvalue()


def report_markdown(report):
    """Markdown text: one table per norm, rules as rows."""
    cfg = report.config
    lines = [
        f"# {cfg.experiment} (n={cfg.n}, k={cfg.k}, trials={cfg.trials}, seed={cfg.seed})",
        "",
    ]
    for norm in cfg.norms:
        lines.append(f"## {norm} norm ratio")
        lines.append("")
        lines.append("| rule | mean_ratio | std_ratio |")
        lines.append("| --- | --- | --- |")
        for row in report.aggregates:
            if row.norm == norm:
                lines.append(f"| {row.rule} | {row.mean_ratio:.17g} | {row.std_ratio:.17g} |")
        lines.append("")
    return "\n".join(lines)


def emit_report(report, fmt=None, path=None):
    """Render the report (and write it when a path is given); returns the text."""
    if not report.aggregates:
        raise ValueError("report is empty; nothing to emit")
    fmt = fmt or report.config.format
    if fmt == "csv":
        text = report_csv(report)
    elif fmt == "markdown":
        text = report_markdown(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path = path or report.config.out
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def read_report_csv(path):
    """Parse an emitted CSV back into AggregateRow values (full precision)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            AggregateRow(
                rule=rec["rule"],
                norm=rec["norm"],
                mean_ratio=float(rec["mean_ratio"]),
                std_ratio=float(rec["std_ratio"]),
                trials=int(rec["trials"]),
            )
            for rec in reader
        ]
