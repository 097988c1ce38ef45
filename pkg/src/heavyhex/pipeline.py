"""Run configuration files and the end-to-end sweep (data, training, evaluation, figures)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .code import build_layout, check_distance
from .dataset import CANONICAL_METHODS, generate
from .decoders import (
    LookupDecoder,
    MwpmBitflipDecoder,
    MwpmPhaseflipDecoder,
    PairDecoder,
    TrainConfig,
    train_decoders,
)
from .evaluation import (
    CSV_COLUMNS,
    SweepResult,
    logical_error_rate,
    logical_error_rate_instances,
    pseudo_threshold,
    threshold,
)
from .noise import MODELS, NoiseConfig, derive_seed, effective_cycle_prob, p_step_for

DECODERS = ("ffnn", "mwpm", "lookup")
LABELS = ("raw", "canonical")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    d: list[int] = field(default_factory=lambda: [3])
    model: str = "bitflip"
    p_step: list[float] = field(default_factory=list)
    q: list[float] = field(default_factory=list)
    steps: int = 11
    syndrome_noise: bool = False
    n_train: int = 100_000
    trials: int = 100_000
    seed: int = 0
    canonical: str = "exact"
    labels: list[str] = field(default_factory=lambda: ["raw", "canonical"])
    decoders: list[str] = field(default_factory=lambda: ["ffnn", "mwpm", "lookup"])
    hidden: int = 0
    epochs: int = 200
    batch: int = 1000
    lr: float = 2.0
    instances: int = 5
    workers: int = 1
    out: str = "sweep_out"
    axis: str = "q_effective"

    def validate(self) -> "RunConfig":
        for d in self.d:
            try:
                check_distance(d)
            except ValueError as ex:
                raise ConfigError(str(ex)) from None
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.p_step and self.q:
            raise ConfigError("give either p_step or q, not both")
        probs = self.p_step or self.q
        if not probs:
            raise ConfigError("no error probabilities given (set p_step or q)")
        for p in probs:
            if not 0.0 < p < 1.0:
                raise ConfigError(f"error probabilities must lie in (0, 1), got {p}")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.n_train < 1 or self.trials < 1:
            raise ConfigError("n_train and trials must be >= 1")
        if self.canonical not in CANONICAL_METHODS:
            raise ConfigError(f"canonical must be one of {CANONICAL_METHODS}, got {self.canonical!r}")
        for lab in self.labels:
            if lab not in LABELS:
                raise ConfigError(f"labels must be drawn from {LABELS}, got {lab!r}")
        for dec in self.decoders:
            if dec not in DECODERS:
                raise ConfigError(f"decoders must be drawn from {DECODERS}, got {dec!r}")
        if "ffnn" in self.decoders and "canonical" in self.labels and self.canonical == "none":
            raise ConfigError("canonical labels requested but canonical = none")
        if "ffnn" in self.decoders and self.batch > self.n_train:
            raise ConfigError(f"batch {self.batch} exceeds n_train {self.n_train}")
        if self.lr <= 0 or self.epochs < 0 or self.instances < 1 or self.batch < 1 or self.hidden < 0:
            raise ConfigError("lr must be > 0; batch, instances >= 1; epochs, hidden >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.axis not in ("q_effective", "p_step"):
            raise ConfigError("axis must be q_effective or p_step")
        return self

    def p_steps(self) -> list[float]:
        if self.p_step:
            return list(self.p_step)
        return [p_step_for(q, self.steps) for q in self.q]

    def to_dict(self) -> dict:
        return asdict(self)


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _split(s: str) -> list[str]:
    return [t for t in (p.strip() for p in s.replace(",", " ").split()) if t]


def parse_value(key: str, text: str):
    """Convert a config string to the type of field ``key``."""
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    default = getattr(RunConfig(), key)
    try:
        if isinstance(default, bool):
            return _parse_bool(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, list):
            items = _split(text)
            if key == "d":
                return [int(t) for t in items]
            if key in ("p_step", "q"):
                return [float(t) for t in items]
            return items
        return text.strip()
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        try:
            out[key] = parse_value(key, value)
        except ConfigError as ex:
            raise ConfigError(f"{source}:{lineno}: {ex}") from None
    return out


def load_config(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), str(path))


def resolve_config(file_values: dict, overrides: dict) -> RunConfig:
    """File values first, then non-None overrides (command-line flags)."""
    values = dict(file_values)
    values.update({k: v for k, v in overrides.items() if v is not None})
    for k in values:
        if k not in _FIELDS:
            raise ConfigError(f"unknown config key {k!r}")
    return replace(RunConfig(), **values).validate()


# ---------------------------------------------------------------- sweep


def baseline_decoders(layout, model: str, q: float, names) -> list:
    """Matching and (at d=3) lookup decoders for the given noise model."""
    out = []
    if "mwpm" in names:
        if model == "bitflip":
            out.append(MwpmBitflipDecoder(layout))
        elif model == "phaseflip":
            out.append(MwpmPhaseflipDecoder(layout))
        else:
            out.append(PairDecoder(MwpmBitflipDecoder(layout), MwpmPhaseflipDecoder(layout)))
    if "lookup" in names and layout.d == 3:
        if model == "bitflip":
            out.append(LookupDecoder(layout, "x", q))
        elif model == "phaseflip":
            out.append(LookupDecoder(layout, "z", q))
        else:
            # each Pauli component flips with probability 2q/3
            qm = 2.0 * q / 3.0
            out.append(PairDecoder(LookupDecoder(layout, "x", qm), LookupDecoder(layout, "z", qm)))
    return out


def ffnn_decoders(ds, cfg: RunConfig, labels: str) -> list:
    tc = TrainConfig(cfg.batch, cfg.epochs, cfg.lr, cfg.instances, derive_seed(cfg.seed, ds.d, 7), cfg.hidden or None)
    if cfg.model == "depolarizing":
        xs, _ = train_decoders(ds, tc, labels, target="x", workers=cfg.workers)
        zs, _ = train_decoders(ds, tc, labels, target="z", workers=cfg.workers)
        return [PairDecoder(a, b, name=f"ffnn-{labels}") for a, b in zip(xs, zs)]
    decs, _ = train_decoders(ds, tc, labels, workers=cfg.workers)
    return decs


def run_sweep(cfg: RunConfig, log=None) -> SweepResult:
    """Every requested decoder at every (d, p) point.

    Seeds: training data for point ``i`` at distance ``d`` uses
    ``derive_seed(seed, d, i, 0)`` and evaluation trials ``derive_seed(seed, d, i, 1)``,
    shared by all decoders at that point.
    """
    cfg.validate()
    log = log or (lambda msg: None)
    points = []
    instance_rates = []
    for d in cfg.d:
        layout = build_layout(d)
        for i, p in enumerate(cfg.p_steps()):
            q = effective_cycle_prob(p, cfg.steps)
            eval_noise = NoiseConfig(cfg.model, p, cfg.steps, cfg.syndrome_noise, derive_seed(cfg.seed, d, i, 1))
            for dec in baseline_decoders(layout, cfg.model, q, cfg.decoders):
                pt = logical_error_rate(dec, layout, eval_noise, cfg.trials, eval_noise.seed)
                points.append(pt)
                log(f"d={d} q={q:.5g} {pt.decoder}: {pt.logical_error_rate:.5g}")
            if "ffnn" in cfg.decoders:
                train_noise = NoiseConfig(cfg.model, p, cfg.steps, cfg.syndrome_noise, derive_seed(cfg.seed, d, i, 0))
                method = cfg.canonical if "canonical" in cfg.labels else "none"
                ds = generate(layout, train_noise, cfg.n_train, method)
                for labels in cfg.labels:
                    decs = ffnn_decoders(ds, cfg, labels)
                    pt, rates = logical_error_rate_instances(decs, layout, eval_noise, cfg.trials, eval_noise.seed, labels=labels)
                    points.append(pt)
                    instance_rates.append({"d": d, "q_effective": q, "labels": labels, "rates": rates,
                                           "min": min(rates), "max": max(rates)})
                    log(f"d={d} q={q:.5g} {pt.decoder}: {pt.logical_error_rate:.5g} (instances {min(rates):.4g}..{max(rates):.4g})")
    res = SweepResult(points)
    for (dec, labels), curves in res.by_decoder().items():
        key = dec if not labels or labels in dec else f"{dec}-{labels}"
        res.pseudo_thresholds[key] = {str(d): pseudo_threshold(pts, cfg.axis).to_json() for d, pts in curves.items()}
        if len(curves) >= 2:
            res.threshold[key] = threshold(curves, cfg.axis).to_json()
    res.extra["instances"] = instance_rates
    return res


def points_csv(points, config: dict | None = None) -> str:
    buf = io.StringIO()
    if config is not None:
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for p in points:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in p.row().items()})
    return buf.getvalue()


def write_sweep(res: SweepResult, cfg: RunConfig, out_dir=None, figures: bool = True) -> dict:
    """Write ``sweep.csv``, ``summary.json`` and the rate figures; return the paths."""
    from .plotting import plot_curves

    out = Path(out_dir or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    conf = cfg.to_dict()
    paths = {"csv": out / "sweep.csv", "summary": out / "summary.json"}
    paths["csv"].write_text(points_csv(res.points, conf))
    summary = {
        "config": conf,
        "pseudo_thresholds": res.pseudo_thresholds,
        "threshold": res.threshold,
        "instances": res.extra.get("instances", []),
    }
    paths["summary"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if figures:
        png, svg = plot_curves(res.points, out / "rates", cfg.axis, title=f"{cfg.model} noise")
        paths["png"], paths["svg"] = png, svg
    return paths
