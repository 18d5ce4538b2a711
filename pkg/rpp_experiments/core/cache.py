"""Persistent caching of solved equivariant bases.

Solving a block basis means an SVD of the stacked constraint matrix. The same
(group, rep_in, rep_out) blocks recur across layers, seeds and experiment
sweeps, so solved blocks are memoized in-process and optionally persisted to a
JSON file with version metadata and corruption detection.
"""

import json
import logging
import threading
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

CACHE_VERSION = "1.0"


class BasisCache:
    """Two-level cache of block bases: in-process memo plus a JSON file.

    Entries are keyed by ``group|rep_in|rep_out|tolerance`` and store the
    orthonormal basis matrix Q of one block. The in-process memo is guarded by
    a lock so worker threads in an experiment sweep can share one cache.

    Attributes:
        cache_file: Path to the cache file (None keeps the cache in memory only)
        logger: Logger instance for cache operations
    """

    def __init__(self, cache_file: Optional[str] = "cache/basis_cache.json") -> None:
        """Initialize the cache.

        Args:
            cache_file: Path to cache file, or None for a memory-only cache
        """
        self.cache_file = Path(cache_file) if cache_file else None
        self.logger = logging.getLogger(__name__)
        self._memo: Dict[str, np.ndarray] = {}
        self._lock = threading.Lock()
        self._loaded = False
        self._dirty = False
        self.hits = 0
        self.misses = 0

    @staticmethod
    def make_key(group_name: str, rep_in: str, rep_out: str, tolerance: float) -> str:
        return f"{group_name}|{rep_in}|{rep_out}|{tolerance:.1e}"

    def _read_file(self) -> Optional[Dict[str, Any]]:
        if self.cache_file is None or not self.cache_file.exists():
            return None
        try:
            with open(self.cache_file, "r", encoding="utf-8") as f:
                data = json.load(f)
            info = data.get("cache_info", {})
            if info.get("version") != CACHE_VERSION:
                self.logger.warning(
                    f"Basis cache version {info.get('version')} does not match "
                    f"{CACHE_VERSION}, ignoring {self.cache_file}"
                )
                return None
            if "timestamp" not in data or "entries" not in data:
                self.logger.warning("Basis cache file missing timestamp or entries")
                return None
            return data
        except (json.JSONDecodeError, ValueError, KeyError) as e:
            self.logger.warning(f"Basis cache file corrupted: {e}")
            return None

    def load(self) -> int:
        """Load persisted entries into the in-process memo.

        Returns:
            Number of entries loaded (0 if the file is missing or invalid)
        """
        with self._lock:
            self._loaded = True
            data = self._read_file()
            if data is None:
                return 0
            loaded = 0
            for key, entry in data["entries"].items():
                try:
                    rows, cols = entry["shape"]
                    q = np.array(entry["Q"], dtype=np.float64).reshape(rows, cols)
                except (KeyError, ValueError, TypeError) as e:
                    self.logger.warning(f"Skipping corrupted cache entry {key}: {e}")
                    continue
                self._memo.setdefault(key, q)
                loaded += 1
            self.logger.info(f"Loaded {loaded} basis blocks from {self.cache_file}")
            return loaded

    def get(self, key: str) -> Optional[np.ndarray]:
        """Return the cached block basis for ``key`` or None."""
        if not self._loaded and self.cache_file is not None:
            self.load()
        with self._lock:
            q = self._memo.get(key)
            if q is None:
                self.misses += 1
            else:
                self.hits += 1
            return q

    def put(self, key: str, basis: np.ndarray) -> None:
        with self._lock:
            self._memo[key] = np.asarray(basis, dtype=np.float64)
            self._dirty = True

    def save(self) -> bool:
        """Write all memoized entries to the cache file.

        Returns:
            True if the cache was saved (or nothing needed saving)
        """
        if self.cache_file is None or not self._dirty:
            return True
        try:
            with self._lock:
                entries = {
                    key: {"shape": list(q.shape), "Q": q.ravel().tolist()}
                    for key, q in sorted(self._memo.items())
                }
                self._dirty = False
            cache_data = {
                "timestamp": datetime.now().isoformat(),
                "entries": entries,
                "cache_info": {
                    "version": CACHE_VERSION,
                    "total_entries": len(entries),
                },
            }
            self.cache_file.parent.mkdir(parents=True, exist_ok=True)
            with open(self.cache_file, "w", encoding="utf-8") as f:
                json.dump(cache_data, f)
            file_size = self.cache_file.stat().st_size
            self.logger.info(
                f"Saved {len(entries)} basis blocks to {self.cache_file} "
                f"({file_size:,} bytes)"
            )
            return True
        except OSError as e:
            self.logger.error(f"Error saving basis cache: {e}")
            return False

    def clear(self) -> bool:
        """Drop the in-process memo and delete the cache file.

        Returns:
            True if the cache was cleared or didn't exist
        """
        with self._lock:
            self._memo.clear()
            self._dirty = False
        try:
            if self.cache_file is not None and self.cache_file.exists():
                self.cache_file.unlink()
                self.logger.info("Basis cache cleared")
            return True
        except OSError as e:
            self.logger.error(f"Error clearing basis cache: {e}")
            return False

    def get_stats(self) -> Dict[str, Any]:
        """Cache statistics for ``--cache-stats``.

        Returns:
            Dictionary with file status, entry count and hit/miss counters.
            If the file doesn't exist: {'exists': False, ...memo counters}
        """
        stats: Dict[str, Any] = {
            "memory_entries": len(self._memo),
            "hits": self.hits,
            "misses": self.misses,
        }
        if self.cache_file is None or not self.cache_file.exists():
            stats["exists"] = False
            return stats

        stats["exists"] = True
        stats["file_size"] = self.cache_file.stat().st_size
        data = self._read_file()
        if data is None:
            stats["valid"] = False
            return stats
        cached_time = datetime.fromisoformat(data["timestamp"])
        stats["valid"] = True
        stats["age_hours"] = (datetime.now() - cached_time).total_seconds() / 3600
        stats["cache_info"] = data.get("cache_info", {})
        return stats
