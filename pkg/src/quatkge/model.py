"""Embedding tables, initialization, scoring functions, and checkpoint format.

Tables hold one quaternion vector per entity and per relation as
component-stacked float64 arrays of shape ``(rows, 4, k)``. Relations are
stored UNnormalized; every scoring path normalizes relation coordinates on
the fly so that training gradients can flow through the normalization.

Scoring conventions:
  * ``quate_d``   - Euclidean distance over all 4k real components between the
                    Hamilton-rotated head and the tail; smaller is better.
  * ``rotate``    - complex-plane reduction using only the (a, b) components;
                    smaller is better.
  * ``quate_inner`` - inner product between the rotated head and the tail;
                    larger is better (comparison baseline only).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from . import quat
from .errors import (CheckpointError, DimensionMismatchError, ShapeMismatchError,
                     ZeroQuaternionError)
from .quat import EPS_NORM, QuatVec

SCORERS = ("quate_d", "rotate", "quate_inner")

_MAGIC = b"QKGE"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Score:
    """A single triple's plausibility score plus the convention it uses."""

    value: float
    scorer: str

    @property
    def lower_is_better(self) -> bool:
        return self.scorer != "quate_inner"


@dataclass
class EmbeddingTable:
    """Entity and relation quaternion embeddings of dimension k."""

    entities: np.ndarray   # (N, 4, k)
    relations: np.ndarray  # (M, 4, k)
    k: int
    seed: int

    @property
    def n_entities(self) -> int:
        return self.entities.shape[0]

    @property
    def n_relations(self) -> int:
        return self.relations.shape[0]

    def entity(self, i: int) -> QuatVec:
        return QuatVec.from_array(self.entities[i])

    def relation(self, j: int) -> QuatVec:
        return QuatVec.from_array(self.relations[j])

    def copy(self) -> "EmbeddingTable":
        return EmbeddingTable(self.entities.copy(), self.relations.copy(),
                              self.k, self.seed)

    def check_finite(self) -> None:
        if not (np.all(np.isfinite(self.entities)) and np.all(np.isfinite(self.relations))):
            raise ZeroQuaternionError("embedding table contains non-finite values")


def _draw_rows(rng: np.random.Generator, rows: int, k: int) -> np.ndarray:
    """Draw `rows` quaternion vectors with the scaled polar scheme.

    Per coordinate: magnitude rho uniform in [-1/sqrt(2k), 1/sqrt(2k)], angle
    theta uniform in [-pi, pi], and a uniformly random unit imaginary
    direction; the real part is rho*cos(theta) and the imaginary parts are
    rho*sin(theta) times the direction. The coordinate magnitude is |rho|.
    """
    bound = 1.0 / math.sqrt(2.0 * k)
    theta = rng.uniform(-math.pi, math.pi, size=(rows, k))
    rho = rng.uniform(-bound, bound, size=(rows, k))
    gauss = rng.standard_normal(size=(rows, 3, k))
    norms = np.sqrt(np.einsum("rck,rck->rk", gauss, gauss))
    degenerate = norms <= 1e-12
    if np.any(degenerate):
        gauss[:, 0, :][degenerate] = 1.0
        norms[degenerate] = 1.0
    direction = gauss / norms[:, None, :]
    real = (rho * np.cos(theta))[:, None, :]
    imag = (rho * np.sin(theta))[:, None, :] * direction
    return np.concatenate([real, imag], axis=1)


def init_embeddings(n_entities: int, n_relations: int, k: int, seed: int) -> EmbeddingTable:
    """Initialize a table; deterministic given seed (entities drawn first)."""
    if min(n_entities, n_relations, k) < 1:
        raise ValueError("n_entities, n_relations, and k must all be >= 1")
    rng = np.random.default_rng(seed)
    entities = _draw_rows(rng, n_entities, k)
    relations = _draw_rows(rng, n_relations, k)
    return EmbeddingTable(entities, relations, k, seed)


def rotate_head(head: QuatVec, relation: QuatVec) -> QuatVec:
    """Rotate the head by the per-coordinate normalized relation."""
    if head.k != relation.k:
        raise DimensionMismatchError(
            f"dimension mismatch: head k={head.k}, relation k={relation.k}")
    return QuatVec.from_array(_rotate(head.as_array(), relation.as_array()))


def _rotate(head: np.ndarray, relation: np.ndarray) -> np.ndarray:
    return quat.hamilton(head, quat.normalize(relation))


def score_quate_d(table: EmbeddingTable, h: int, r: int, t: int) -> Score:
    """Distance between the rotated head and the tail over all 4k components."""
    diff = _rotate(table.entities[h], table.relations[r]) - table.entities[t]
    return Score(float(np.sqrt(np.sum(diff * diff))), "quate_d")


def _complex_rotate(head_ab: np.ndarray, rel_ab: np.ndarray) -> np.ndarray:
    """Coordinate-wise complex product of (2, k) arrays, relation normalized."""
    modulus = np.sqrt(rel_ab[0] ** 2 + rel_ab[1] ** 2)
    if np.any(modulus <= EPS_NORM):
        raise ZeroQuaternionError("relation has a zero complex coordinate")
    p, q = rel_ab[0] / modulus, rel_ab[1] / modulus
    return np.stack([head_ab[0] * p - head_ab[1] * q,
                     head_ab[0] * q + head_ab[1] * p])


def score_rotate(table: EmbeddingTable, h: int, r: int, t: int) -> Score:
    """Complex-plane distance using only the (a, b) components."""
    rotated = _complex_rotate(table.entities[h, :2], table.relations[r, :2])
    diff = rotated - table.entities[t, :2]
    return Score(float(np.sqrt(np.sum(diff * diff))), "rotate")


def score_quate_inner(table: EmbeddingTable, h: int, r: int, t: int) -> Score:
    """Inner product of the rotated head with the tail (larger is better)."""
    rotated = _rotate(table.entities[h], table.relations[r])
    return Score(float(np.sum(rotated * table.entities[t])), "quate_inner")


_SCORE_FUNCS = {
    "quate_d": score_quate_d,
    "rotate": score_rotate,
    "quate_inner": score_quate_inner,
}


def score_triples(table: EmbeddingTable, triples, scorer: str = "quate_d") -> np.ndarray:
    """Vectorized scores for an integer triple array of shape (B, 3)."""
    arr = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    heads = table.entities[arr[:, 0]]
    tails = table.entities[arr[:, 2]]
    rels = table.relations[arr[:, 1]]
    if scorer == "rotate":
        modulus = np.sqrt(rels[:, 0, :] ** 2 + rels[:, 1, :] ** 2)
        if np.any(modulus <= EPS_NORM):
            raise ZeroQuaternionError("relation has a zero complex coordinate")
        p, q = rels[:, 0, :] / modulus, rels[:, 1, :] / modulus
        re = heads[:, 0, :] * p - heads[:, 1, :] * q - tails[:, 0, :]
        im = heads[:, 0, :] * q + heads[:, 1, :] * p - tails[:, 1, :]
        return np.sqrt(np.einsum("bk,bk->b", re, re) + np.einsum("bk,bk->b", im, im))
    rotated = quat.hamilton(heads, quat.normalize(rels))
    if scorer == "quate_inner":
        return np.einsum("bck,bck->b", rotated, tails)
    if scorer != "quate_d":
        raise ValueError(f"unknown scorer {scorer!r}")
    diff = rotated - tails
    return np.sqrt(np.einsum("bck,bck->b", diff, diff))


def score_triple(table: EmbeddingTable, h: int, r: int, t: int,
                 scorer: str = "quate_d") -> Score:
    try:
        func = _SCORE_FUNCS[scorer]
    except KeyError:
        raise ValueError(f"unknown scorer {scorer!r}") from None
    return func(table, h, r, t)


class CandidateScorer:
    """Scores every entity in the corrupted position of a query.

    Rotation happens once per query; candidate distances then come from the
    expansion |x - e|^2 = |x|^2 + |e|^2 - 2<x, e> with cached per-row squared
    norms, so a full sweep costs one matrix-vector product. Head queries use
    the adjoint identity <Q_h (x) w, Q_t> = <Q_h, Q_t (x) conj(w)> for unit w.
    """

    def __init__(self, table: EmbeddingTable, scorer: str = "quate_d"):
        if scorer not in SCORERS:
            raise ValueError(f"unknown scorer {scorer!r}")
        self.table = table
        self.scorer = scorer
        n = table.n_entities
        if scorer == "rotate":
            self._flat = np.ascontiguousarray(table.entities[:, :2, :]).reshape(n, -1)
        else:
            self._flat = table.entities.reshape(n, -1)
        self._row_sq = np.einsum("nc,nc->n", self._flat, self._flat)

    @property
    def lower_is_better(self) -> bool:
        return self.scorer != "quate_inner"

    def _distance_sweep(self, query_vec: np.ndarray) -> np.ndarray:
        flat = query_vec.ravel()
        d_sq = self._row_sq + flat @ flat - 2.0 * (self._flat @ flat)
        return np.sqrt(np.clip(d_sq, 0.0, None))

    def all_tails(self, h: int, r: int) -> np.ndarray:
        """Score (h, r, t) for every t; shape (N,)."""
        table = self.table
        if self.scorer == "rotate":
            rotated = _complex_rotate(table.entities[h, :2], table.relations[r, :2])
            return self._distance_sweep(rotated)
        rotated = _rotate(table.entities[h], table.relations[r])
        if self.scorer == "quate_inner":
            return self._flat @ rotated.ravel()
        return self._distance_sweep(rotated)

    def all_heads(self, r: int, t: int) -> np.ndarray:
        """Score (h, r, t) for every h; shape (N,)."""
        table = self.table
        if self.scorer == "rotate":
            rel = table.relations[r, :2]
            pulled = _complex_rotate(table.entities[t, :2], np.stack([rel[0], -rel[1]]))
            return self._distance_sweep(pulled)
        unit_rel = quat.normalize(table.relations[r])
        pulled = quat.hamilton(table.entities[t], quat.conjugate(unit_rel))
        if self.scorer == "quate_inner":
            return self._flat @ pulled.ravel()
        return self._distance_sweep(pulled)


def score_all_tails(table: EmbeddingTable, h: int, r: int,
                    scorer: str = "quate_d") -> np.ndarray:
    return CandidateScorer(table, scorer).all_tails(h, r)


def score_all_heads(table: EmbeddingTable, r: int, t: int,
                    scorer: str = "quate_d") -> np.ndarray:
    return CandidateScorer(table, scorer).all_heads(r, t)


# ---------------------------------------------------------------------------
# Checkpoint format: magic, binary version, canonical JSON metadata, then the
# four component arrays per table (a, b, c, d), entities before relations,
# each row-major by id then coordinate, little-endian float64.
# ---------------------------------------------------------------------------

def save_checkpoint(table: EmbeddingTable, path, scorer: str = "quate_d",
                    config_hash: str = "") -> None:
    meta = {
        "config_hash": config_hash,
        "format_version": FORMAT_VERSION,
        "k": table.k,
        "n_entities": table.n_entities,
        "n_relations": table.n_relations,
        "scorer": scorer,
        "seed": table.seed,
    }
    header = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(_MAGIC)
        handle.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        handle.write(header)
        for block in (table.entities, table.relations):
            for component in range(4):
                handle.write(np.ascontiguousarray(block[:, component, :], dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[EmbeddingTable, dict]:
    with open(path, "rb") as handle:
        raw = handle.read()
    if raw[:4] != _MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
    version, header_len = struct.unpack("<II", raw[4:12])
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    try:
        meta = json.loads(raw[12:12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: malformed metadata: {exc}") from exc
    n, m, k = meta["n_entities"], meta["n_relations"], meta["k"]
    offset = 12 + header_len
    expected = (n + m) * 4 * k * 8
    if len(raw) - offset != expected:
        raise CheckpointError(
            f"{path}: payload is {len(raw) - offset} bytes, expected {expected}")

    def read_block(rows: int, at: int) -> tuple[np.ndarray, int]:
        parts = []
        for _ in range(4):
            arr = np.frombuffer(raw, dtype="<f8", count=rows * k, offset=at)
            parts.append(arr.astype(np.float64).reshape(rows, k))
            at += rows * k * 8
        return np.stack(parts, axis=1), at

    entities, offset = read_block(n, offset)
    relations, _ = read_block(m, offset)
    table = EmbeddingTable(entities, relations, k, meta["seed"])
    return table, meta


def check_table_matches_store(table: EmbeddingTable, n_entities: int,
                              n_relations: int) -> None:
    """Raise ShapeMismatchError when checkpoint and dataset dimensions differ."""
    if table.n_entities != n_entities or table.n_relations != n_relations:
        raise ShapeMismatchError(
            f"checkpoint has {table.n_entities} entities / {table.n_relations} relations, "
            f"dataset has {n_entities} / {n_relations}")
