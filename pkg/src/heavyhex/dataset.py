"""Labelled syndrome/error datasets stored as JSON lines (header first)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .canonical import canonicalize_x_packed, canonicalize_z_array, x_gauge_basis
from .code import CodeLayout, batch_syndrome, build_layout
from .gf2 import pack_bits, project_to_leader_packed, unpack_bits
from .noise import NoiseConfig, apply_syndrome_noise, make_rng, sample_errors

FORMAT = "heavyhex-dataset"
VERSION = 1
CANONICAL_METHODS = ("search", "rank", "exact", "none")
CHUNK = 10_000

FIELDS = ("syndrome_z", "syndrome_x", "error_x", "error_z", "canon_x", "canon_z")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetRecord:
    syndrome_z: str
    syndrome_x: str
    error_x: str
    error_z: str
    canon_x: str | None
    canon_z: str | None


@dataclass
class Dataset:
    """Column-oriented in-memory dataset; every array is ``uint8`` 0/1."""

    header: dict
    syndrome_z: np.ndarray
    syndrome_x: np.ndarray
    error_x: np.ndarray
    error_z: np.ndarray
    canon_x: np.ndarray | None = None
    canon_z: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.error_x)

    @property
    def d(self) -> int:
        return int(self.header["d"])

    def records(self) -> Iterator[DatasetRecord]:
        def s(a):
            return "".join("1" if b else "0" for b in a)

        for k in range(len(self)):
            yield DatasetRecord(
                s(self.syndrome_z[k]),
                s(self.syndrome_x[k]),
                s(self.error_x[k]),
                s(self.error_z[k]),
                None if self.canon_x is None else s(self.canon_x[k]),
                None if self.canon_z is None else s(self.canon_z[k]),
            )

    def inputs(self, which: str) -> np.ndarray:
        """Decoder input matrix: ``'z'``, ``'x'`` or the concatenation ``'zx'``."""
        if which == "z":
            return self.syndrome_z
        if which == "x":
            return self.syndrome_x
        if which == "zx":
            return np.concatenate([self.syndrome_z, self.syndrome_x], axis=1)
        raise ValueError(f"unknown input selection {which!r}")

    def labels(self, target: str, kind: str) -> np.ndarray:
        if target not in ("x", "z"):
            raise ValueError(f"target must be 'x' or 'z', got {target!r}")
        if kind == "raw":
            return self.error_x if target == "x" else self.error_z
        if kind == "canonical":
            arr = self.canon_x if target == "x" else self.canon_z
            if arr is None:
                raise DatasetError(f"dataset has no canonical {target} labels; run canonicalize first")
            return arr
        raise ValueError(f"labels must be 'raw' or 'canonical', got {kind!r}")

    def write(self, path) -> None:
        path = Path(path)
        header = dict(self.header)
        header["n_records"] = len(self)
        with path.open("w", encoding="ascii", newline="\n") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for rec in self.records():
                fh.write(json.dumps(rec.__dict__, sort_keys=True) + "\n")


def _canon(layout: CodeLayout, e_x, e_z, method: str):
    if method == "none":
        return None, None
    cx = unpack_bits(canonicalize_x_packed(pack_bits(e_x), layout, method), layout.n_qubits)
    cz = canonicalize_z_array(e_z, layout.d)
    return cx, cz


def generate(
    layout: CodeLayout,
    noise: NoiseConfig,
    n: int,
    canonical_method: str = "exact",
    extra_header: dict | None = None,
) -> Dataset:
    """Sample ``n`` labelled records; deterministic in ``noise.seed``.

    Sampling runs in fixed chunks of 10k records, chunk ``k`` drawing from the
    stream ``(seed, k)``, so output is independent of how work is scheduled.
    """
    if int(n) != n or n < 1:
        raise DatasetError(f"N must be >= 1, got {n}")
    if canonical_method not in CANONICAL_METHODS:
        raise DatasetError(f"canonical method must be one of {CANONICAL_METHODS}, got {canonical_method!r}")
    if canonical_method == "search" and x_gauge_basis(layout).full_span is None:
        raise DatasetError(f"search canonicalisation is not supported at d={layout.d} (gauge span too large); use exact or rank")
    q = noise.q
    ex, ez = [], []
    sz, sx = [], []
    for k, start in enumerate(range(0, n, CHUNK)):
        size = min(CHUNK, n - start)
        rng = make_rng(noise.seed, k)
        e_x, e_z = sample_errors(noise.model, layout.n_qubits, q, rng, size)
        s_z = batch_syndrome(layout.z_check_matrix, e_x)
        s_x = batch_syndrome(layout.x_check_matrix, e_z)
        if noise.syndrome_noise:
            s_z = apply_syndrome_noise(s_z, q, rng)
            s_x = apply_syndrome_noise(s_x, q, rng)
        ex.append(e_x)
        ez.append(e_z)
        sz.append(s_z)
        sx.append(s_x)
    e_x, e_z = np.concatenate(ex), np.concatenate(ez)
    cx, cz = _canon(layout, e_x, e_z, canonical_method)
    header = {
        "format": FORMAT,
        "version": VERSION,
        "d": layout.d,
        "noise": noise.to_dict(),
        "q_effective": q,
        "seed": noise.seed,
        "canonical": canonical_method,
        "n_records": int(n),
    }
    if extra_header:
        header["config"] = extra_header
    return Dataset(header, np.concatenate(sz), np.concatenate(sx), e_x, e_z, cx, cz)


def canonicalize(ds: Dataset, method: str) -> Dataset:
    """Return a copy with canonical labels filled in by ``method``.

    ``search``/``rank``/``exact`` fill both fields (X by the chosen bit-flip
    route, Z by the column fold); ``phase`` fills only the Z labels.
    """
    layout = build_layout(ds.d)
    header = dict(ds.header)
    if method == "phase":
        cx, cz = ds.canon_x, canonicalize_z_array(ds.error_z, layout.d)
    elif method in ("search", "rank", "exact"):
        if method == "search" and x_gauge_basis(layout).full_span is None:
            raise DatasetError(f"search canonicalisation is not supported at d={layout.d}; use exact or rank")
        cx, cz = _canon(layout, ds.error_x, ds.error_z, method)
    else:
        raise DatasetError(f"unknown canonical method {method!r}")
    header["canonical"] = method
    return Dataset(header, ds.syndrome_z, ds.syndrome_x, ds.error_x, ds.error_z, cx, cz)


def _bits(s, n, where):
    if s is None:
        return None
    if not isinstance(s, str) or len(s) != n or set(s) - {"0", "1"}:
        raise DatasetError(f"{where}: expected a {n}-bit string, got {s!r}")
    return [1 if c == "1" else 0 for c in s]


def iter_records(path, verify: bool = False) -> Iterator[tuple[dict, DatasetRecord]]:
    """Stream ``(header, record)`` pairs, validating shapes and optionally labels."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    with path.open("r", encoding="ascii") as fh:
        first = fh.readline()
        try:
            header = json.loads(first)
        except json.JSONDecodeError as ex:
            raise DatasetError(f"{path}:1: malformed header: {ex.msg}") from None
        if header.get("format") != FORMAT:
            raise DatasetError(f"{path}:1: not a {FORMAT} file")
        if header.get("version") != VERSION:
            raise DatasetError(f"{path}:1: unsupported format version {header.get('version')!r}")
        layout = build_layout(header["d"])
        n = layout.n_qubits
        mz, mx = layout.n_z_stabilizers, layout.n_x_stabilizers
        check_syndromes = verify and not header.get("noise", {}).get("syndrome_noise", False)
        gb = x_gauge_basis(layout) if verify else None
        count = 0
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            where = f"{path}:{lineno} (record {count + 1})"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as ex:
                raise DatasetError(f"{where}: malformed line: {ex.msg}") from None
            if not isinstance(obj, dict) or set(obj) != set(FIELDS):
                raise DatasetError(f"{where}: malformed record, expected fields {FIELDS}")
            sz = _bits(obj["syndrome_z"], mz, where)
            sx = _bits(obj["syndrome_x"], mx, where)
            ex = _bits(obj["error_x"], n, where)
            ez = _bits(obj["error_z"], n, where)
            cx = _bits(obj["canon_x"], n, where)
            cz = _bits(obj["canon_z"], n, where)
            if verify:
                _verify(layout, gb, where, sz, sx, ex, ez, cx, cz, check_syndromes)
            count += 1
            yield header, DatasetRecord(**obj)
        if count != header.get("n_records"):
            raise DatasetError(f"{path}: record count mismatch: header says {header.get('n_records')}, found {count}")


def _verify(layout, gb, where, sz, sx, ex, ez, cx, cz, check_syndromes):
    e_x = np.array([ex], dtype=np.uint8)
    e_z = np.array([ez], dtype=np.uint8)
    clean_z = batch_syndrome(layout.z_check_matrix, e_x)[0].tolist()
    clean_x = batch_syndrome(layout.x_check_matrix, e_z)[0].tolist()
    if check_syndromes and (clean_z != sz or clean_x != sx):
        raise DatasetError(f"{where}: stored syndrome does not match error")
    if cx is not None:
        want = project_to_leader_packed(gb.reduced, pack_bits(e_x))
        if int(want[0]) != int(pack_bits(np.array([cx]))[0]):
            raise DatasetError(f"{where}: canon_x is not the canonical form of error_x")
    if cz is not None:
        if canonicalize_z_array(e_z, layout.d)[0].tolist() != cz:
            raise DatasetError(f"{where}: canon_z is not the canonical form of error_z")


def load(path, verify: bool = False) -> Dataset:
    header = None
    cols = {f: [] for f in FIELDS}
    for header, rec in iter_records(path, verify):
        for f in FIELDS:
            cols[f].append(getattr(rec, f))
    if header is None:
        # empty body: re-read the header for the count check
        with Path(path).open() as fh:
            header = json.loads(fh.readline())
        raise DatasetError(f"{path}: dataset has no records (header says {header.get('n_records')})")

    def arr(strings):
        if any(s is None for s in strings):
            return None
        return np.array([[c == "1" for c in s] for s in strings], dtype=np.uint8)

    return Dataset(
        header,
        arr(cols["syndrome_z"]),
        arr(cols["syndrome_x"]),
        arr(cols["error_x"]),
        arr(cols["error_z"]),
        arr(cols["canon_x"]),
        arr(cols["canon_z"]),
    )
