"""Monte Carlo logical error rates, pseudo-thresholds, thresholds and canonicalisation timing."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .canonical import (
    canonical_bitflip_exact,
    canonical_bitflip_rank,
    canonical_bitflip_search,
    canonicalize_z_array,
    x_gauge_basis,
)
from .code import CodeLayout, batch_syndrome
from .gf2 import BitVec, pack_bits, project_to_leader_packed
from .noise import NoiseConfig, apply_syndrome_noise, make_rng, sample_errors

CHUNK = 10_000
WILSON_Z = 1.959963984540054


@dataclass(frozen=True)
class CurvePoint:
    d: int
    p_step: float
    q_effective: float
    logical_error_rate: float
    trials: int
    failures: int
    ci_halfwidth: float
    ci_lo: float
    ci_hi: float
    decoder: str = ""
    labels: str = ""

    def x(self, axis: str) -> float:
        return getattr(self, axis)

    def row(self) -> dict:
        return {
            "d": self.d,
            "p_step": self.p_step,
            "q_effective": self.q_effective,
            "trials": self.trials,
            "failures": self.failures,
            "rate": self.logical_error_rate,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "decoder": self.decoder,
            "labels": self.labels,
        }


CSV_COLUMNS = ("d", "p_step", "q_effective", "trials", "failures", "rate", "ci_lo", "ci_hi", "decoder", "labels")


def wilson_interval(failures: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    p = failures / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def make_point(d, noise: NoiseConfig, failures: int, trials: int, decoder="", labels="") -> CurvePoint:
    lo, hi = wilson_interval(failures, trials)
    return CurvePoint(
        d=d,
        p_step=noise.p_step,
        q_effective=noise.q,
        logical_error_rate=failures / trials,
        trials=trials,
        failures=failures,
        ci_halfwidth=(hi - lo) / 2,
        ci_lo=lo,
        ci_hi=hi,
        decoder=decoder,
        labels=labels,
    )


def failures_x(layout: CodeLayout, residual: np.ndarray) -> np.ndarray:
    """True where an X residual is outside the X gauge span (nonzero canonical form)."""
    reps = project_to_leader_packed(x_gauge_basis(layout).reduced, pack_bits(residual))
    return reps != 0


def failures_z(layout: CodeLayout, residual: np.ndarray) -> np.ndarray:
    return canonicalize_z_array(residual, layout.d).any(axis=1)


def is_failure(layout: CodeLayout, actual: BitVec, predicted: BitVec, target: str = "x") -> bool:
    r = (actual ^ predicted).to_array()[None, :]
    return bool((failures_x if target == "x" else failures_z)(layout, r)[0])


def count_failures(decoder, layout: CodeLayout, noise: NoiseConfig, trials: int, seed: int, target: str, chunk0: int = 0):
    """Failures over ``trials`` samples drawn in fixed 10k chunks from streams ``(seed, k)``."""
    q = noise.q
    fails = 0
    for k, start in enumerate(range(0, trials, CHUNK), start=chunk0):
        size = min(CHUNK, trials - start)
        rng = make_rng(seed, k)
        e_x, e_z = sample_errors(noise.model, layout.n_qubits, q, rng, size)
        s_z = batch_syndrome(layout.z_check_matrix, e_x)
        s_x = batch_syndrome(layout.x_check_matrix, e_z)
        if noise.syndrome_noise:
            s_z = apply_syndrome_noise(s_z, q, rng)
            s_x = apply_syndrome_noise(s_x, q, rng)
        pred = decoder.decode(s_z, s_x)
        n = layout.n_qubits
        if target == "x":
            bad = failures_x(layout, e_x ^ pred)
        elif target == "z":
            bad = failures_z(layout, e_z ^ pred)
        elif target == "xz":
            bad = failures_x(layout, e_x ^ pred[:, :n]) | failures_z(layout, e_z ^ pred[:, n:])
        else:
            raise ValueError(f"target must be 'x', 'z' or 'xz', got {target!r}")
        fails += int(bad.sum())
    return fails


def default_target(model: str, decoder=None) -> str:
    if decoder is not None and getattr(decoder, "target", None):
        return decoder.target
    return {"bitflip": "x", "phaseflip": "z", "depolarizing": "xz"}[model]


def logical_error_rate(decoder, layout: CodeLayout, noise: NoiseConfig, trials: int, seed: int, target: str | None = None, labels: str = "") -> CurvePoint:
    """Estimate the logical failure probability of ``decoder`` under ``noise``.

    A trial fails when the residual ``actual ^ predicted`` is not a gauge
    operator for the error type under test.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    target = target or default_target(noise.model, decoder)
    fails = count_failures(decoder, layout, noise, trials, seed, target)
    return make_point(layout.d, noise, fails, trials, getattr(decoder, "name", ""), labels)


def logical_error_rate_instances(decoders: Sequence, layout, noise, trials, seed, target=None, labels=""):
    """Evaluate several independently trained instances on the same trials.

    Every instance sees the trial stream used by :func:`logical_error_rate`
    with the same seed, so instance and baseline rates are paired.  Returns
    a point holding the pooled failure count (its rate is the mean instance
    rate) and the list of per-instance rates.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rates = []
    total = 0
    for dec in decoders:
        t = target or default_target(noise.model, dec)
        f = count_failures(dec, layout, noise, trials, seed, t)
        rates.append(f / trials)
        total += f
    name = getattr(decoders[0], "name", "")
    return make_point(layout.d, noise, total, trials * len(decoders), name, labels), rates


# ---------------------------------------------------------------- crossings


@dataclass
class Crossing:
    value: float | None
    bracket: tuple[float, float] | None = None
    note: str = ""
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def _floor_rate(p: CurvePoint) -> float:
    # zero counts get half a failure so logs stay finite
    return p.logical_error_rate if p.failures > 0 else 0.5 / p.trials


def _log_root(x0, x1, f0, f1) -> float:
    t = f0 / (f0 - f1)
    return math.exp(math.log(x0) + t * (math.log(x1) - math.log(x0)))


def identity_brackets(points: Sequence[CurvePoint], axis: str = "q_effective") -> list[tuple[int, int]]:
    pts = sorted(points, key=lambda p: p.x(axis))
    f = [math.log(_floor_rate(p)) - math.log(p.x(axis)) for p in pts]
    out = []
    for i in range(len(pts) - 1):
        if f[i] == 0 or f[i] * f[i + 1] < 0:
            out.append((i, i + 1))
    return out


def pseudo_threshold(points: Sequence[CurvePoint], axis: str = "q_effective") -> Crossing:
    """Where the logical rate curve meets ``rate == physical``, by log-log interpolation."""
    pts = sorted(points, key=lambda p: p.x(axis))
    if len(pts) < 2:
        return Crossing(None, None, "outside sweep range")
    xs = [p.x(axis) for p in pts]
    if any(x <= 0 for x in xs):
        raise ValueError("pseudo-threshold needs strictly positive physical error probabilities")
    f = [math.log(_floor_rate(p)) - math.log(x) for p, x in zip(pts, xs)]
    if all(abs(v) < 1e-12 for v in f):
        return Crossing((xs[0] + xs[1]) / 2, (xs[0], xs[1]), "degenerate", ["curve coincides with the identity line"])
    for i in range(len(pts) - 1):
        if abs(f[i]) < 1e-12:
            return Crossing(xs[i], (xs[i], xs[i]), "on sample point")
        if f[i] * f[i + 1] < 0:
            found = Crossing(_log_root(xs[i], xs[i + 1], f[i], f[i + 1]), (xs[i], xs[i + 1]), "interpolated")
            n_cross = len(identity_brackets(pts, axis))
            if n_cross > 1:
                found.warnings.append(f"curve crosses the identity line {n_cross} times; first crossing reported")
            return found
    if abs(f[-1]) < 1e-12:
        return Crossing(xs[-1], (xs[-1], xs[-1]), "on sample point")
    side = "above" if f[0] > 0 else "below"
    return Crossing(None, None, f"outside sweep range (curve entirely {side} the identity line)")


def _interp_loglog(xs, ys, x):
    lx = np.log(xs)
    return float(np.exp(np.interp(math.log(x), lx, np.log(ys))))


def curve_crossing(a: Sequence[CurvePoint], b: Sequence[CurvePoint], axis: str = "q_effective") -> Crossing:
    """Crossing of two logical-rate curves (``a`` the smaller distance)."""
    a = sorted(a, key=lambda p: p.x(axis))
    b = sorted(b, key=lambda p: p.x(axis))
    xa = [p.x(axis) for p in a]
    xb = [p.x(axis) for p in b]
    lo, hi = max(xa[0], xb[0]), min(xa[-1], xb[-1])
    if lo >= hi:
        return Crossing(None, None, "no crossing (no overlapping range)")
    grid = sorted({x for x in xa + xb if lo <= x <= hi})
    ya = [_floor_rate(p) for p in a]
    yb = [_floor_rate(p) for p in b]
    g = [math.log(_interp_loglog(xa, ya, x)) - math.log(_interp_loglog(xb, yb, x)) for x in grid]
    if all(abs(v) < 1e-12 for v in g):
        return Crossing(None, None, "no crossing (curves coincide)")
    for i in range(len(grid) - 1):
        if abs(g[i]) < 1e-12 and i > 0 and g[i - 1] * g[i + 1] < 0:
            return Crossing(grid[i], (grid[i - 1], grid[i + 1]), "on sample point")
        if g[i] * g[i + 1] < 0:
            return Crossing(_log_root(grid[i], grid[i + 1], g[i], g[i + 1]), (grid[i], grid[i + 1]), "interpolated")
    if all(v >= 0 for v in g):
        note = "no crossing: larger distance is better across the range (threshold above sampled range)"
    else:
        note = "no crossing: larger distance is worse across the range (threshold below smallest sampled p)"
    return Crossing(None, None, note)


@dataclass
class ThresholdResult:
    value: float | None
    pairs: list[tuple[int, int, Crossing]]

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "pairs": [{"d_small": a, "d_large": b, **c.to_json()} for a, b, c in self.pairs],
        }


def threshold(curves: dict[int, Sequence[CurvePoint]], axis: str = "q_effective") -> ThresholdResult:
    """Mean crossing over adjacent distance pairs."""
    ds = sorted(curves)
    if len(ds) < 2:
        raise ValueError("threshold needs curves for at least two distances")
    pairs = []
    for a, b in zip(ds, ds[1:]):
        pairs.append((a, b, curve_crossing(curves[a], curves[b], axis)))
    vals = [c.value for _, _, c in pairs if c.value is not None]
    return ThresholdResult(float(np.mean(vals)) if vals else None, pairs)


@dataclass
class SweepResult:
    points: list[CurvePoint]
    pseudo_thresholds: dict = field(default_factory=dict)
    threshold: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def by_decoder(self) -> dict[tuple[str, str], dict[int, list[CurvePoint]]]:
        out: dict = {}
        for p in self.points:
            out.setdefault((p.decoder, p.labels), {}).setdefault(p.d, []).append(p)
        return out


# ---------------------------------------------------------------- timing


BENCH_METHODS = ("none", "search", "rank", "exact")


def bench_gauge(d: int, n: int, methods: Sequence[str] = ("none", "search", "rank"), q: float = 0.05, seed: int = 0, layout=None):
    """Wall-clock canonicalisation time per method over the same ``n`` sampled bit-flip errors."""
    from .code import build_layout

    if n <= 0:
        return []
    layout = layout or build_layout(d)
    gb = x_gauge_basis(layout)
    for m in methods:
        if m not in BENCH_METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {BENCH_METHODS}")
        if m == "search" and gb.full_span is None:
            raise ValueError(f"search method unavailable at d={d}: gauge span exceeds the cap")
    e_x, _ = sample_errors("bitflip", layout.n_qubits, q, make_rng(seed), n)
    errors = [BitVec(int(v), layout.n_qubits) for v in pack_bits(e_x)]
    rows = []
    for m in methods:
        t0 = time.perf_counter()
        if m == "none":
            reps = list(errors)
        elif m == "search":
            reps = [canonical_bitflip_search(e, gb) for e in errors]
        elif m == "rank":
            reps = canonical_bitflip_rank(errors, layout, gb)
        else:
            reps = [canonical_bitflip_exact(e, gb) for e in errors]
        dt = time.perf_counter() - t0
        rows.append({"method": m, "d": d, "n": n, "seconds": dt, "distinct_labels": len({r.value for r in reps})})
    return rows
