"""Triple-file ingestion, vocabularies, filter index, and type-constraint index.

Input files are the usual benchmark format: UTF-8 text, one triple per line,
three tab-separated fields (head, relation, tail). Vocabulary ids are assigned
by first appearance over train, then valid, then test, so entities that only
occur in evaluation splits still get ids (they are never updated by training
but must exist for ranking).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError

HEAD = "head"
TAIL = "tail"

RawTriple = tuple[str, str, str]
Triple = tuple[int, int, int]


def load_split(path) -> list[RawTriple]:
    """Read one split file, in file order, without deduplication."""
    triples: list[RawTriple] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(path, line_no,
                                 f"expected 3 tab-separated fields, got {len(parts)}")
            triples.append((parts[0], parts[1], parts[2]))
    return triples


@dataclass
class TripleStore:
    """Integer-encoded splits plus every index evaluation and training need.

    Immutable after construction: all consumers only read.
    """

    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    entity_names: list[str]
    entity_ids: dict[str, int]
    relation_names: list[str]
    relation_ids: dict[str, int]
    all_true: frozenset[Triple]
    # Training-split occurrences per relation, used for type constraints.
    type_heads: dict[int, np.ndarray] = field(repr=False)
    type_tails: dict[int, np.ndarray] = field(repr=False)
    # Filtered-ranking index over all splits: true tails of (h, r), heads of (t, r).
    tails_of: dict[tuple[int, int], np.ndarray] = field(repr=False)
    heads_of: dict[tuple[int, int], np.ndarray] = field(repr=False)

    @property
    def n_entities(self) -> int:
        return len(self.entity_names)

    @property
    def n_relations(self) -> int:
        return len(self.relation_names)

    def split(self, name: str) -> np.ndarray:
        if name not in ("train", "valid", "test"):
            raise ValueError(f"unknown split {name!r}")
        return getattr(self, name)

    def is_true(self, head: int, relation: int, tail: int) -> bool:
        """Membership in the union of all three splits (filtered protocol)."""
        return (head, relation, tail) in self.all_true

    def type_candidates(self, relation: int, position: str) -> np.ndarray:
        """Entity ids observed at `position` for `relation` in training.

        Falls back to the full entity set when the relation never appears in
        training at that position.
        """
        if position == HEAD:
            observed = self.type_heads.get(relation)
        elif position == TAIL:
            observed = self.type_tails.get(relation)
        else:
            raise ValueError(f"position must be 'head' or 'tail', got {position!r}")
        if observed is None or observed.size == 0:
            return np.arange(self.n_entities, dtype=np.int64)
        return observed

    def true_competitors(self, triple: Triple, position: str) -> np.ndarray:
        """Entity ids whose substitution at `position` yields a known-true triple."""
        head, relation, tail = triple
        if position == HEAD:
            return self.heads_of.get((tail, relation), _EMPTY_IDS)
        return self.tails_of.get((head, relation), _EMPTY_IDS)

    def stats(self) -> dict:
        return {
            "entities": self.n_entities,
            "relations": self.n_relations,
            "triples": int(len(self.train) + len(self.valid) + len(self.test)),
            "train": int(len(self.train)),
            "valid": int(len(self.valid)),
            "test": int(len(self.test)),
        }


_EMPTY_IDS = np.empty(0, dtype=np.int64)


def _encode(raw: list[RawTriple], entity_ids: dict[str, int],
            relation_ids: dict[str, int], entity_names: list[str],
            relation_names: list[str]) -> np.ndarray:
    rows = np.empty((len(raw), 3), dtype=np.int64)
    for i, (h, r, t) in enumerate(raw):
        for name, vocab, names in ((h, entity_ids, entity_names),
                                   (r, relation_ids, relation_names),
                                   (t, entity_ids, entity_names)):
            if name not in vocab:
                vocab[name] = len(names)
                names.append(name)
        rows[i, 0] = entity_ids[h]
        rows[i, 1] = relation_ids[r]
        rows[i, 2] = entity_ids[t]
    return rows


def build_store(train: list[RawTriple], valid: list[RawTriple],
                test: list[RawTriple]) -> TripleStore:
    """Assign vocabularies and build the filter and type-constraint indices.

    Duplicate triples within a split are kept (they weight training) but the
    filter set is deduplicated.
    """
    entity_ids: dict[str, int] = {}
    relation_ids: dict[str, int] = {}
    entity_names: list[str] = []
    relation_names: list[str] = []

    encoded = [_encode(raw, entity_ids, relation_ids, entity_names, relation_names)
               for raw in (train, valid, test)]
    train_arr, valid_arr, test_arr = encoded

    all_true = frozenset(
        (int(h), int(r), int(t))
        for arr in encoded for h, r, t in arr
    )

    type_heads_sets: dict[int, set[int]] = {}
    type_tails_sets: dict[int, set[int]] = {}
    for h, r, t in train_arr:
        type_heads_sets.setdefault(int(r), set()).add(int(h))
        type_tails_sets.setdefault(int(r), set()).add(int(t))

    tails_sets: dict[tuple[int, int], set[int]] = {}
    heads_sets: dict[tuple[int, int], set[int]] = {}
    for h, r, t in all_true:
        tails_sets.setdefault((h, r), set()).add(t)
        heads_sets.setdefault((t, r), set()).add(h)

    def freeze(sets: dict) -> dict:
        return {key: np.array(sorted(vals), dtype=np.int64) for key, vals in sets.items()}

    return TripleStore(
        train=train_arr,
        valid=valid_arr,
        test=test_arr,
        entity_names=entity_names,
        entity_ids=entity_ids,
        relation_names=relation_names,
        relation_ids=relation_ids,
        all_true=all_true,
        type_heads=freeze(type_heads_sets),
        type_tails=freeze(type_tails_sets),
        tails_of=freeze(tails_sets),
        heads_of=freeze(heads_sets),
    )


def load_dataset(train_path, valid_path, test_path) -> TripleStore:
    """Load the three split files and build the store."""
    return build_store(load_split(train_path), load_split(valid_path),
                       load_split(test_path))


def dataset_dir_paths(directory) -> tuple[Path, Path, Path]:
    """Conventional file names inside a benchmark dataset directory."""
    base = Path(directory)
    return base / "train.txt", base / "valid.txt", base / "test.txt"
