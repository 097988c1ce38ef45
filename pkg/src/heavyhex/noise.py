"""Pauli-frame noise sampling: bit flip, phase flip and symmetric depolarizing channels."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .code import CodeLayout
from .gf2 import BitVec, pack_bits

MODELS = ("bitflip", "phaseflip", "depolarizing")


def _check_prob(p, name="p"):
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


def effective_cycle_prob(p_step: float, steps: int = 11) -> float:
    """Probability that at least one of ``steps`` independent faults fires."""
    p_step = _check_prob(p_step, "p_step")
    if int(steps) != steps or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps}")
    return -math.expm1(steps * math.log1p(-p_step)) if p_step < 1.0 else 1.0


@dataclass(frozen=True)
class NoiseConfig:
    model: str = "bitflip"
    p_step: float = 0.001
    steps: int = 11
    syndrome_noise: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        _check_prob(self.p_step, "p_step")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")

    @property
    def q(self) -> float:
        return effective_cycle_prob(self.p_step, self.steps)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PauliSample:
    e_x: BitVec
    e_z: BitVec


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Independent PCG64 stream for ``(seed, *spawn_key)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def derive_seed(seed: int, *key: int) -> int:
    """Deterministic 32-bit child seed for a sub-task identified by ``key``."""
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1)[0])


def p_step_for(q: float, steps: int = 11) -> float:
    """Inverse of :func:`effective_cycle_prob`."""
    q = _check_prob(q, "q")
    return -math.expm1(math.log1p(-q) / steps) if q < 1.0 else 1.0


def sample_errors(model: str, n_qubits: int, q: float, rng: np.random.Generator, size: int):
    """Batch of ``size`` samples as two ``(size, n_qubits)`` uint8 arrays ``(e_x, e_z)``."""
    q = _check_prob(q, "q")
    shape = (size, n_qubits)
    if model == "bitflip":
        e_x = (rng.random(shape) < q).astype(np.uint8)
        return e_x, np.zeros(shape, dtype=np.uint8)
    if model == "phaseflip":
        e_z = (rng.random(shape) < q).astype(np.uint8)
        return np.zeros(shape, dtype=np.uint8), e_z
    if model == "depolarizing":
        hit = rng.random(shape) < q
        # 0 -> X, 1 -> Y, 2 -> Z
        kind = rng.integers(0, 3, size=shape)
        e_x = (hit & (kind <= 1)).astype(np.uint8)
        e_z = (hit & (kind >= 1)).astype(np.uint8)
        return e_x, e_z
    raise ValueError(f"unknown noise model {model!r}")


def _one(model, layout: CodeLayout, q, rng) -> PauliSample:
    e_x, e_z = sample_errors(model, layout.n_qubits, q, rng, 1)
    n = layout.n_qubits
    return PauliSample(BitVec(int(pack_bits(e_x)[0]), n), BitVec(int(pack_bits(e_z)[0]), n))


def sample_bitflip(layout: CodeLayout, q: float, rng: np.random.Generator) -> PauliSample:
    return _one("bitflip", layout, q, rng)


def sample_phaseflip(layout: CodeLayout, q: float, rng: np.random.Generator) -> PauliSample:
    return _one("phaseflip", layout, q, rng)


def sample_depolarizing(layout: CodeLayout, q: float, rng: np.random.Generator) -> PauliSample:
    return _one("depolarizing", layout, q, rng)


def apply_syndrome_noise(s, q: float, rng: np.random.Generator):
    """Flip each syndrome bit independently with probability ``q``.

    Accepts a :class:`BitVec` or a 0/1 numpy array of any shape.
    """
    q = _check_prob(q, "q")
    if isinstance(s, BitVec):
        flips = rng.random(s.length) < q
        mask = sum(1 << k for k in np.flatnonzero(flips).tolist())
        return BitVec(s.value ^ mask, s.length)
    s = np.asarray(s, dtype=np.uint8)
    return s ^ (rng.random(s.shape) < q).astype(np.uint8)
