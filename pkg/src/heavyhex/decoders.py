"""Decoders: one-hidden-layer neural decoder, matching baselines, exact lookup oracle.

Every decoder object exposes ``target`` (``'x'`` for bit flips, ``'z'`` for
phase flips) and ``decode(syn_z, syn_x)`` mapping ``(N, m)`` 0/1 syndrome
arrays to an ``(N, d*d)`` 0/1 array of predicted error strings.
"""

from __future__ import annotations

import json
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .canonical import canonicalize_x_array, canonicalize_z_array, x_gauge_basis
from .code import CodeLayout, batch_syndrome, build_layout
from .gf2 import BitVec, pack_bits, project_to_leader_packed, unpack_bits

MODEL_FORMAT = "heavyhex-mlp"
MODEL_VERSION = 1
DEFAULT_HIDDEN = {3: 128, 5: 256, 7: 512}
EXACT_MATCH_LIMIT = 14


def default_hidden(d: int) -> int:
    return DEFAULT_HIDDEN.get(d, 512)


# ---------------------------------------------------------------- neural decoder


@dataclass
class MlpModel:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    seed: int = 0

    def __post_init__(self):
        h, i = self.W1.shape
        o, h2 = self.W2.shape
        if h != h2 or self.b1.shape != (h,) or self.b2.shape != (o,):
            raise ValueError("inconsistent MLP dimensions")

    @property
    def in_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W1.shape[0]

    @property
    def out_dim(self) -> int:
        return self.W2.shape[0]

    def params(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2, self.b2]

    def copy(self) -> "MlpModel":
        return MlpModel(*(p.copy() for p in self.params()), seed=self.seed)

    def to_json(self) -> dict:
        return {
            "in_dim": self.in_dim,
            "hidden_dim": self.hidden_dim,
            "out_dim": self.out_dim,
            "seed": self.seed,
            "W1": self.W1.tolist(),
            "b1": self.b1.tolist(),
            "W2": self.W2.tolist(),
            "b2": self.b2.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MlpModel":
        m = cls(
            np.array(obj["W1"], dtype=float).reshape(obj["hidden_dim"], obj["in_dim"]),
            np.array(obj["b1"], dtype=float),
            np.array(obj["W2"], dtype=float).reshape(obj["out_dim"], obj["hidden_dim"]),
            np.array(obj["b2"], dtype=float),
            seed=int(obj.get("seed", 0)),
        )
        if not all(np.isfinite(p).all() for p in m.params()):
            raise ValueError("model contains non-finite weights")
        return m


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 10_000
    epochs: int = 1000
    learning_rate: float = 0.01
    instances: int = 5
    seed: int = 0
    hidden_dim: int | None = None

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1 or self.epochs < 0 or self.instances < 1:
            raise ValueError("batch_size and instances must be >= 1, epochs >= 0")


def mlp_init(in_dim: int, hidden_dim: int, out_dim: int, seed: int = 0) -> MlpModel:
    if min(in_dim, hidden_dim, out_dim) < 1:
        raise ValueError("all dimensions must be >= 1")
    rng = np.random.default_rng(seed)

    def glorot(fan_out, fan_in):
        a = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-a, a, size=(fan_out, fan_in))

    return MlpModel(
        glorot(hidden_dim, in_dim),
        np.zeros(hidden_dim),
        glorot(out_dim, hidden_dim),
        np.zeros(out_dim),
        seed=seed,
    )


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def mlp_forward(m: MlpModel, s) -> np.ndarray:
    """Per-qubit error probabilities for one syndrome or an ``(N, in_dim)`` batch."""
    s = np.asarray(s, dtype=float)
    if s.shape[-1] != m.in_dim:
        raise ValueError(f"input dimension {s.shape[-1]} != {m.in_dim}")
    h = np.maximum(s @ m.W1.T + m.b1, 0.0)
    return _sigmoid(h @ m.W2.T + m.b2)


def bce_loss(m: MlpModel, X: np.ndarray, Y: np.ndarray, w: np.ndarray | None = None) -> float:
    """Mean per-bit binary cross-entropy, computed from logits.

    ``w`` gives per-row multiplicities; the result equals the unweighted loss
    of the dataset with each row repeated ``w[i]`` times.
    """
    return bce_grad(m, X, Y, w)[0]


def bce_grad(m: MlpModel, X: np.ndarray, Y: np.ndarray, w: np.ndarray | None = None):
    """Loss and gradients ``(dW1, db1, dW2, db2)`` of :func:`bce_loss`."""
    if w is None:
        w = np.ones(len(X))
    total = w.sum() * Y.shape[1]
    a1 = X @ m.W1.T + m.b1
    h = np.maximum(a1, 0.0)
    z = h @ m.W2.T + m.b2
    # log(1 + e^z) - y z, stable for both signs of z
    loss = float(np.sum(w[:, None] * (np.logaddexp(0.0, z) - Y * z)) / total)
    dz = w[:, None] * (_sigmoid(z) - Y) / total
    dW2 = dz.T @ h
    db2 = dz.sum(axis=0)
    da1 = (dz @ m.W2) * (a1 > 0)
    dW1 = da1.T @ X
    db1 = da1.sum(axis=0)
    return loss, (dW1, db1, dW2, db2)


def _row_keys(X, Y):
    """Integer id per distinct (input, label) row, or None when rows are too wide to key."""
    A = np.concatenate([X, Y], axis=1)
    if A.shape[1] > 63 or not np.isin(A, (0, 1)).all():
        return None
    return pack_bits(A.astype(np.uint8))


def mlp_train(m: MlpModel, X, Y, cfg: TrainConfig) -> tuple[MlpModel, list[float]]:
    """Mini-batch SGD on mean per-bit cross-entropy.

    Returns a trained copy and the per-epoch mean batch loss.  Batches are
    reshuffled every epoch from a generator seeded with ``cfg.seed``.  When a
    batch holds many repeated rows (small codes, low noise) the repeats are
    folded into weights, which leaves the batch gradient unchanged.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = len(X)
    if n == 0:
        raise ValueError("empty training set")
    if Y.shape != (n, m.out_dim) or X.shape[1] != m.in_dim:
        raise ValueError(f"data shapes {X.shape}, {Y.shape} do not match model {m.in_dim}->{m.out_dim}")
    if cfg.batch_size > n:
        raise ValueError(f"batch_size {cfg.batch_size} exceeds dataset size {n}")
    keys = _row_keys(X, Y)
    if keys is not None and len(np.unique(keys)) * 4 > n:
        keys = None
    m = m.copy()
    rng = np.random.default_rng(cfg.seed)
    lr = cfg.learning_rate
    trace = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total, batches = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            if keys is None:
                loss, grads = bce_grad(m, X[idx], Y[idx])
            else:
                _, first, counts = np.unique(keys[idx], return_index=True, return_counts=True)
                rows = idx[first]
                loss, grads = bce_grad(m, X[rows], Y[rows], counts.astype(float))
            if not math.isfinite(loss):
                raise FloatingPointError(f"non-finite loss at epoch {epoch}, batch {batches}: {loss}")
            for p, g in zip(m.params(), grads):
                p -= lr * g
            total += loss
            batches += 1
        trace.append(total / batches)
    return m, trace


def mlp_predict(m: MlpModel, s, canonicalizer=None) -> np.ndarray:
    """Threshold outputs at 0.5, then apply ``canonicalizer`` (identity if None)."""
    bits = (mlp_forward(m, s) > 0.5).astype(np.uint8)
    if canonicalizer is None:
        return bits
    single = bits.ndim == 1
    out = canonicalizer(np.atleast_2d(bits))
    return out[0] if single else out


def make_canonicalizer(layout: CodeLayout, target: str):
    if target == "x":
        return lambda a: canonicalize_x_array(a, layout, "exact")
    if target == "z":
        return lambda a: canonicalize_z_array(a, layout.d)
    raise ValueError(f"target must be 'x' or 'z', got {target!r}")


def select_inputs(syn_z, syn_x, inputs: str) -> np.ndarray:
    if inputs == "z":
        return np.asarray(syn_z)
    if inputs == "x":
        return np.asarray(syn_x)
    if inputs == "zx":
        return np.concatenate([np.asarray(syn_z), np.asarray(syn_x)], axis=1)
    raise ValueError(f"unknown input selection {inputs!r}")


@dataclass
class MlpDecoder:
    """A trained network plus how to feed it and how to post-process its output."""

    model: MlpModel
    d: int
    target: str = "x"
    inputs: str = "z"
    labels: str = "canonical"
    canonicalize_output: bool = True
    name: str = "ffnn"

    def decode(self, syn_z, syn_x) -> np.ndarray:
        X = select_inputs(syn_z, syn_x, self.inputs)
        canon = make_canonicalizer(build_layout(self.d), self.target) if self.canonicalize_output else None
        return mlp_predict(self.model, X, canon)


def default_inputs(model: str) -> str:
    return {"bitflip": "z", "phaseflip": "x", "depolarizing": "zx"}[model]


def save_models(path, decoders: list[MlpDecoder], meta: dict | None = None) -> None:
    if not decoders:
        raise ValueError("no models to save")
    first = decoders[0]
    obj = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "d": first.d,
        "target": first.target,
        "inputs": first.inputs,
        "labels": first.labels,
        "instances": [dec.model.to_json() for dec in decoders],
    }
    if meta:
        obj["meta"] = meta
    Path(path).write_text(json.dumps(obj, sort_keys=True) + "\n")


def load_models(path) -> list[MlpDecoder]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    obj = json.loads(path.read_text())
    if obj.get("format") != MODEL_FORMAT or obj.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} v{MODEL_VERSION} file")
    return [
        MlpDecoder(
            MlpModel.from_json(inst),
            d=obj["d"],
            target=obj["target"],
            inputs=obj["inputs"],
            labels=obj["labels"],
            canonicalize_output=obj["labels"] == "canonical",
            name=f"ffnn-{obj['labels']}",
        )
        for inst in obj["instances"]
    ]


def _train_one(X, Y, hidden, cfg: TrainConfig, seed: int):
    m0 = mlp_init(X.shape[1], hidden, Y.shape[1], seed)
    inst_cfg = TrainConfig(cfg.batch_size, cfg.epochs, cfg.learning_rate, 1, seed, hidden)
    return mlp_train(m0, X, Y, inst_cfg)


def train_decoders(
    ds,
    cfg: TrainConfig,
    labels: str = "canonical",
    target: str | None = None,
    inputs: str | None = None,
    workers: int = 1,
):
    """Train ``cfg.instances`` decoders on one dataset; instance ``k`` uses seed ``cfg.seed + k``.

    With ``workers > 1`` instances train in separate processes; results do not
    depend on the worker count.
    """
    model = ds.header["noise"]["model"]
    target = target or ("z" if model == "phaseflip" else "x")
    inputs = inputs or default_inputs(model)
    X = ds.inputs(inputs)
    Y = ds.labels(target, labels)
    hidden = cfg.hidden_dim or default_hidden(ds.d)
    seeds = [cfg.seed + k for k in range(cfg.instances)]
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
            results = list(pool.map(_train_one, *zip(*[(X, Y, hidden, cfg, s) for s in seeds])))
    else:
        results = [_train_one(X, Y, hidden, cfg, s) for s in seeds]
    out = [
        MlpDecoder(m, ds.d, target, inputs, labels, canonicalize_output=labels == "canonical", name=f"ffnn-{labels}")
        for m, _ in results
    ]
    return out, [trace for _, trace in results]


# ---------------------------------------------------------------- matching


@dataclass
class MatchingGraph:
    """Checks as nodes, data qubits as unit-weight edges, one shared boundary node."""

    n_checks: int
    dist: np.ndarray
    path_mask: list[list[int]]

    @property
    def boundary(self) -> int:
        return self.n_checks


def build_matching_graph(checks, n_qubits: int) -> MatchingGraph:
    m = len(checks)
    B = m
    adj: list[dict[int, int]] = [dict() for _ in range(m + 1)]
    for q in range(n_qubits):
        owners = [s for s, c in enumerate(checks) if (c.value >> q) & 1]
        if len(owners) == 1:
            a, b = owners[0], B
        elif len(owners) == 2:
            a, b = owners
        elif not owners:
            continue
        else:
            raise ValueError(f"qubit {q} lies in {len(owners)} checks; matching needs at most 2")
        # keep the lowest-index qubit per edge so paths are deterministic
        adj[a].setdefault(b, q)
        adj[b].setdefault(a, q)
    dist = np.full((m + 1, m + 1), np.inf)
    path_mask = [[0] * (m + 1) for _ in range(m + 1)]
    for src in range(m + 1):
        dist[src, src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if dist[src, v] == np.inf:
                    dist[src, v] = dist[src, u] + 1
                    path_mask[src][v] = path_mask[src][u] ^ (1 << adj[u][v])
                    queue.append(v)
    return MatchingGraph(m, dist, path_mask)


def min_weight_matching(defects: list[int], g: MatchingGraph) -> tuple[list[tuple[int, int]], bool]:
    """Minimum-weight pairing of defects, each optionally matched to the boundary.

    Exact bitmask dynamic programme up to ``EXACT_MATCH_LIMIT`` defects,
    greedy nearest pair beyond that.  Returns ``(pairs, exact)`` where a
    boundary match appears as ``(defect, g.boundary)``.
    """
    k = len(defects)
    B = g.boundary
    dist = g.dist
    if k > EXACT_MATCH_LIMIT:
        return _greedy_matching(defects, g), False

    @lru_cache(maxsize=None)
    def best(mask: int):
        if mask == 0:
            return 0.0, ()
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        a = defects[i]
        cost, pairs = best(rest)
        choice = (cost + dist[a, B], ((a, B),) + pairs)
        r = rest
        while r:
            j = (r & -r).bit_length() - 1
            r &= r - 1
            b = defects[j]
            c, p = best(rest & ~(1 << j))
            c += dist[a, b]
            if c < choice[0]:
                choice = (c, ((a, b),) + p)
        return choice

    return list(best((1 << k) - 1)[1]), True


def _greedy_matching(defects, g):
    B = g.boundary
    left = list(defects)
    pairs = []
    while left:
        best = None
        for x in range(len(left)):
            a = left[x]
            cand = (g.dist[a, B], x, None)
            if best is None or cand[0] < best[0]:
                best = cand
            for y in range(x + 1, len(left)):
                c = g.dist[a, left[y]]
                if c < best[0]:
                    best = (c, x, y)
        _, x, y = best
        if y is None:
            pairs.append((left[x], B))
            left.pop(x)
        else:
            pairs.append((left[x], left[y]))
            left.pop(y)
            left.pop(x)
    return pairs


class MwpmBitflipDecoder:
    """Matching decoder for bit flips on the Z-stabilizer graph (memoised per syndrome)."""

    target = "x"
    name = "mwpm"

    def __init__(self, layout: CodeLayout):
        self.layout = layout
        self.graph = build_matching_graph(layout.z_stabilizers, layout.n_qubits)
        self.n_greedy = 0
        self._cache: dict[bytes, np.ndarray] = {}

    def correction(self, syndrome: BitVec) -> tuple[BitVec, bool]:
        if syndrome.length != self.graph.n_checks:
            raise ValueError(f"syndrome length {syndrome.length} != {self.graph.n_checks}")
        defects = syndrome.indices()
        pairs, exact = min_weight_matching(defects, self.graph)
        mask = 0
        for a, b in pairs:
            mask ^= self.graph.path_mask[a][b]
        return BitVec(mask, self.layout.n_qubits), exact

    def decode(self, syn_z, syn_x=None) -> np.ndarray:
        syn_z = np.asarray(syn_z, dtype=np.uint8)
        out = np.empty((len(syn_z), self.layout.n_qubits), dtype=np.uint8)
        for r, row in enumerate(syn_z):
            key = row.tobytes()
            hit = self._cache.get(key)
            if hit is None:
                corr, exact = self.correction(BitVec.from_bits(row))
                if not exact:
                    self.n_greedy += 1
                hit = corr.to_array()
                self._cache[key] = hit
            out[r] = hit
        return out


def mwpm_decode_bitflip(layout: CodeLayout, syndrome: BitVec) -> BitVec:
    return MwpmBitflipDecoder(layout).correction(syndrome)[0]


def match_line(defects: list[int], d: int) -> list[tuple[int, int]]:
    """Optimal pairing of sorted defect positions ``1..d-1`` on a line with boundaries at 0 and d."""
    k = len(defects)
    cost = [0.0] * (k + 1)
    choice: list = [None] * (k + 1)
    for i in range(1, k + 1):
        p = defects[i - 1]
        side = (0, p) if p <= d - p else (p, d)
        cost[i] = cost[i - 1] + min(p, d - p)
        choice[i] = ("b", side)
        if i >= 2:
            c = cost[i - 2] + (p - defects[i - 2])
            if c < cost[i]:
                cost[i] = c
                choice[i] = ("p", (defects[i - 2], p))
    spans = []
    i = k
    while i > 0:
        kind, span = choice[i]
        spans.append(span)
        i -= 1 if kind == "b" else 2
    return spans[::-1]


class MwpmPhaseflipDecoder:
    """One-dimensional matching between column-strip defects."""

    target = "z"
    name = "mwpm"

    def __init__(self, layout: CodeLayout):
        self.layout = layout

    def correction(self, syndrome: BitVec) -> BitVec:
        d = self.layout.d
        if syndrome.length != d - 1:
            raise ValueError(f"syndrome length {syndrome.length} != {d - 1}")
        # strip s (0-based) sits between columns s+1 and s+2: position s+1
        defects = [s + 1 for s in syndrome.indices()]
        mask = 0
        for a, b in match_line(defects, d):
            # columns a+1..b (1-based) -> top-row indices a..b-1
            for col in range(a, b):
                mask ^= 1 << col
        return BitVec(mask, d * d)

    def decode(self, syn_z, syn_x) -> np.ndarray:
        syn_x = np.asarray(syn_x, dtype=np.uint8)
        out = np.empty((len(syn_x), self.layout.n_qubits), dtype=np.uint8)
        cache: dict[bytes, np.ndarray] = {}
        for r, row in enumerate(syn_x):
            key = row.tobytes()
            if key not in cache:
                cache[key] = self.correction(BitVec.from_bits(row)).to_array()
            out[r] = cache[key]
        return out


def mwpm_decode_phaseflip(layout: CodeLayout, syndrome: BitVec) -> BitVec:
    return MwpmPhaseflipDecoder(layout).correction(syndrome)


# ---------------------------------------------------------------- lookup oracle


class LookupDecoder:
    """Maximum-likelihood class decoder by enumerating all ``2**(d*d)`` error strings (d=3)."""

    name = "lookup"

    def __init__(self, layout: CodeLayout, target: str, q: float):
        if layout.d != 3:
            raise ValueError("lookup decoding is only supported for d=3")
        if target not in ("x", "z"):
            raise ValueError(f"target must be 'x' or 'z', got {target!r}")
        self.layout = layout
        self.target = target
        self.q = q
        n = layout.n_qubits
        everything = np.arange(2**n, dtype=np.uint64)
        bits = unpack_bits(everything, n)
        weight = bits.sum(axis=1)
        if q <= 0:
            prob = (weight == 0).astype(float)
        elif q >= 1:
            prob = (weight == n).astype(float)
        else:
            prob = np.exp(weight * np.log(q) + (n - weight) * np.log1p(-q))
        if target == "x":
            syn = batch_syndrome(layout.z_check_matrix, bits)
            reps = project_to_leader_packed(x_gauge_basis(layout).reduced, everything)
        else:
            syn = batch_syndrome(layout.x_check_matrix, bits)
            reps = pack_bits(canonicalize_z_array(bits, layout.d))
        syn_key = pack_bits(syn)
        self.m = syn.shape[1]
        class_prob: dict[tuple[int, int], float] = {}
        for s, r, p in zip(syn_key.tolist(), reps.tolist(), prob.tolist()):
            class_prob[(s, r)] = class_prob.get((s, r), 0.0) + p
        self.table: dict[int, int] = {}
        for (s, r), p in sorted(class_prob.items()):
            cur = self.table.get(s)
            # increasing representative order; a relative margin absorbs rounding so exact
            # ties keep the lighter representative
            if cur is None or p > class_prob[(s, cur)] * (1 + 1e-9):
                self.table[s] = r

    def correction(self, syndrome: BitVec) -> BitVec:
        if syndrome.length != self.m:
            raise ValueError(f"syndrome length {syndrome.length} != {self.m}")
        return BitVec(self.table[syndrome.value], self.layout.n_qubits)

    def decode(self, syn_z, syn_x) -> np.ndarray:
        syn = np.asarray(syn_z if self.target == "x" else syn_x, dtype=np.uint8)
        keys = pack_bits(syn).tolist()
        vals = np.array([self.table[k] for k in keys], dtype=np.uint64)
        return unpack_bits(vals, self.layout.n_qubits)


def lookup_decode(layout: CodeLayout, syndrome: BitVec, error_type: str, q: float) -> BitVec:
    target = {"bitflip": "x", "phaseflip": "z", "x": "x", "z": "z"}[error_type]
    return LookupDecoder(layout, target, q).correction(syndrome)


@dataclass
class PairDecoder:
    """Depolarizing decoding with separate X and Z predictors; output is ``[x | z]``."""

    x: object
    z: object
    name: str = ""
    target: str = "xz"

    def __post_init__(self):
        if not self.name:
            self.name = getattr(self.x, "name", "pair")

    def decode(self, syn_z, syn_x) -> np.ndarray:
        return np.concatenate([self.x.decode(syn_z, syn_x), self.z.decode(syn_z, syn_x)], axis=1)
