"""Persistent (state, action) -> verdict cache.

File layout: UTF-8 JSON lines, appended as verdicts are stored::

    {"key": "<sha256 hex>", "shift": -1, "provenance": "llm"}

``key`` hashes ``env_id``, the observation's human rendering and the action
index, joined by the unit separator U+001F. Later records for a key win.
Lines that fail to parse or validate are skipped and counted in
``corrupt_records``; an unreadable file starts the cache empty and bumps
``warnings``. Loading never raises.
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path

from rewardshift.core import SHIFT_SUPPORT, Observation, ShiftVerdict
from rewardshift.llm.parsing import PARSE_FAILURE

CACHE_HIT = "cache_hit"
_SEP = "\x1f"


def cache_key(env_id: str, human: str, action: int) -> str:
    blob = _SEP.join((env_id, human, str(int(action))))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class VerdictCache:
    def __init__(self, path: str | Path | None = None) -> None:
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, tuple[int, str]] = {}
        self._lock = threading.Lock()
        self.corrupt_records = 0
        self.warnings = 0
        if self.path is not None:
            self._load()

    def __len__(self) -> int:
        return len(self._entries)

    def _load(self) -> None:
        if not self.path.exists():
            return
        try:
            text = self.path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError):
            self.warnings += 1
            return
        for line in text.splitlines():
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                key, shift, prov = rec["key"], rec["shift"], rec["provenance"]
                if not (isinstance(key, str) and len(key) == 64 and isinstance(prov, str)):
                    raise ValueError("bad field")
                if isinstance(shift, bool) or shift not in SHIFT_SUPPORT:
                    raise ValueError("bad shift")
            except (ValueError, KeyError, TypeError):
                self.corrupt_records += 1
                continue
            self._entries[key] = (int(shift), prov)
        if self.corrupt_records:
            self.warnings += 1

    def get(self, key: str) -> tuple[int, str] | None:
        return self._entries.get(key)

    def put(self, key: str, shift: int, provenance: str) -> None:
        with self._lock:
            self._entries[key] = (shift, provenance)
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                rec = {"key": key, "shift": shift, "provenance": provenance}
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")


def cached_evaluate(cache: VerdictCache, evaluator, obs: Observation, action: int) -> ShiftVerdict:
    """Serve from ``cache`` or delegate to ``evaluator``; failed verdicts are not stored."""
    key = cache_key(obs.env_id, obs.human, action)
    hit = cache.get(key)
    if hit is not None:
        evaluator.counter.cache_hits += 1
        return ShiftVerdict(hit[0], evaluator.scale, CACHE_HIT, hit[1])
    verdict = evaluator.evaluate(obs, action)
    if verdict.provenance != PARSE_FAILURE:
        cache.put(key, verdict.shift, verdict.provenance)
    return verdict
