# -*- coding: utf-8 -*-
"""
Memo cache for spinframe.
Holds Fourier symbols, conformal factor samples and eigensolver results,
keyed by the JSON form of the inputs that determine them.
"""

from collections import Counter, OrderedDict
from typing import Any, Dict, Optional
import hashlib
import json
import logging

import numpy as np

from src.utils.config import config


def _freeze(value: Any) -> Any:
    """Cached arrays are read-only."""
    if isinstance(value, np.ndarray):
        value.setflags(write=False)
    return value


class CacheManager:
    """
    Bounded least-recently-used cache.

    Every cached value is a pure function of its key, so nothing expires;
    once `size_limit` entries are held the least recently used one is dropped.
    """

    def __init__(self, size_limit: Optional[int] = None):
        """Initialize cache manager."""
        self.entries: 'OrderedDict[str, Any]' = OrderedDict()
        self.size_limit = size_limit or config.get('cache_size_limit', 64)
        self.counts: Counter = Counter()
        self.logger = logging.getLogger(__name__)

    @staticmethod
    def make_key(kind: str, *parts: Any) -> str:
        """
        Build the key `<kind>:<md5 of the JSON parts>`.

        Args:
            kind: Entry kind ('symbol_momenta', 'conformal_samples', 'eigenpairs')
            *parts: JSON-serialisable inputs (to_dict() forms, tuples, numbers)

        Returns:
            Key string
        """
        payload = json.dumps(parts, sort_keys=True, default=str)
        return f"{kind}:{hashlib.md5(payload.encode()).hexdigest()}"

    def get(self, kind: str, *parts: Any) -> Optional[Any]:
        """Cached value for the inputs, or None."""
        key = self.make_key(kind, *parts)
        if key not in self.entries:
            self.counts['misses'] += 1
            return None
        self.entries.move_to_end(key)
        self.counts['hits'] += 1
        self.logger.debug(f"Cache hit: {kind}")
        return self.entries[key]

    def set(self, kind: str, value: Any, *parts: Any) -> None:
        """Store a value, evicting the least recently used entries past the limit."""
        key = self.make_key(kind, *parts)
        self.entries[key] = _freeze(value)
        self.entries.move_to_end(key)
        self.counts['sets'] += 1
        while len(self.entries) > self.size_limit:
            evicted, _ = self.entries.popitem(last=False)
            self.counts['evictions'] += 1
            self.logger.debug(f"Cache evicted: {evicted.split(':', 1)[0]}")

    def clear_by_type(self, kind: str) -> int:
        """
        Drop every entry of one kind.

        Returns:
            Number of entries removed
        """
        doomed = [key for key in self.entries if key.startswith(f"{kind}:")]
        for key in doomed:
            del self.entries[key]
        self.logger.info(f"Cleared {len(doomed)} '{kind}' entries")
        return len(doomed)

    def get_stats(self) -> Dict[str, Any]:
        """Hit/miss counters and occupancy."""
        lookups = self.counts['hits'] + self.counts['misses']
        return {
            'total_entries': len(self.entries),
            'cache_hits': self.counts['hits'],
            'cache_misses': self.counts['misses'],
            'hit_rate_percent': round(100.0 * self.counts['hits'] / lookups, 2) if lookups else 0.0,
            'cache_sets': self.counts['sets'],
            'evictions': self.counts['evictions'],
            'size_limit': self.size_limit
        }

    def get_size_info(self) -> Dict[str, int]:
        """Number of entries per kind."""
        return dict(Counter(key.split(':', 1)[0] for key in self.entries))


_cache_manager: Optional[CacheManager] = None


def get_cache_manager() -> CacheManager:
    """Process-wide cache manager."""
    global _cache_manager
    if _cache_manager is None:
        _cache_manager = CacheManager()
    return _cache_manager
