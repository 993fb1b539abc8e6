"""Learner checkpoint files.

Layout (format version 1): a NumPy ``.npz`` archive holding

* ``meta`` -- 0-d unicode array with a JSON object: ``format`` ("rewardshift-checkpoint"),
  ``version`` (1), ``kind`` (learner kind), ``config_hash`` (hex digest of the
  learner config), ``config`` (the config itself) and kind-specific fields;
* ``values`` -- float64 array: the Q table rows (tabular, in ``meta["keys"]``
  order), the weight matrix (linear) or the item-value grid (slate);
* ``counts`` -- int64 array of per-cell update counts (tabular and slate).

Floats are stored as raw IEEE-754 doubles, so a round trip is bit exact.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from rewardshift.core import ConfigError
from rewardshift.learners.base import LearnerConfig
from rewardshift.learners.linear import LinearQ
from rewardshift.learners.slate import ItemwiseSlateQ
from rewardshift.learners.tabular import TabularQLearner

FORMAT = "rewardshift-checkpoint"
VERSION = 1


def config_hash(cfg: LearnerConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def save_checkpoint(learner, path: str | Path) -> Path:
    path = Path(path)
    meta = {
        "format": FORMAT,
        "version": VERSION,
        "kind": learner.kind,
        "config_hash": config_hash(learner.cfg),
        "config": learner.cfg.to_dict(),
    }
    if isinstance(learner, TabularQLearner):
        keys = list(learner.q.values)
        meta["keys"] = [list(k) for k in keys]
        meta["n_actions"] = learner.q.n_actions
        values = np.array([learner.q.values[k] for k in keys], dtype=np.float64).reshape(
            len(keys), learner.q.n_actions
        )
        counts = np.array([learner.q.counts[k] for k in keys], dtype=np.int64).reshape(values.shape)
    elif isinstance(learner, LinearQ):
        values = learner.weights.astype(np.float64)
        counts = np.zeros(0, dtype=np.int64)
        meta["alpha"] = learner.alpha
    elif isinstance(learner, ItemwiseSlateQ):
        values = learner.q.astype(np.float64)
        counts = learner.counts.astype(np.int64)
    else:
        raise TypeError(f"cannot checkpoint {type(learner).__name__}")
    with path.open("wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta, sort_keys=True)), values=values, counts=counts)
    return path


def read_checkpoint(path: str | Path) -> tuple[dict, np.ndarray, np.ndarray]:
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        values = data["values"].copy()
        counts = data["counts"].copy()
    if meta.get("format") != FORMAT or meta.get("version") != VERSION:
        raise ConfigError(f"{path}: not a version-{VERSION} {FORMAT} file")
    return meta, values, counts


def load_into(learner, path: str | Path):
    """Restore state saved by :func:`save_checkpoint` into a learner built from the same config."""
    meta, values, counts = read_checkpoint(path)
    if meta["kind"] != learner.kind:
        raise ConfigError(f"checkpoint holds a {meta['kind']} learner, not {learner.kind}")
    if meta["config_hash"] != config_hash(learner.cfg):
        raise ConfigError("checkpoint was written under a different learner config")
    if isinstance(learner, TabularQLearner):
        learner.q.values = {}
        learner.q.counts = {}
        for key, row, cnt in zip(meta["keys"], values, counts):
            k = tuple(float(v) for v in key)
            learner.q.values[k] = row.tolist()
            learner.q.counts[k] = [int(c) for c in cnt]
    elif isinstance(learner, LinearQ):
        if values.shape != learner.weights.shape:
            raise ConfigError("weight shape mismatch")
        learner.weights = values
        learner.alpha = meta["alpha"]
    else:
        learner.q = values
        learner.counts = counts
    return learner
