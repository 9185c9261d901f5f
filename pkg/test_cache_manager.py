#!/usr/bin/env python3
"""
Pruebas del caché en memoria: expiración, estadísticas y claves estables.
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from seqpart.models.geometry import AxisBox
from seqpart.utils.cache_manager import CacheManager


class ManualClock:
    def __init__(self):
        self.now = 0.0

    def __call__(self):
        return self.now


def test_entries_expire():
    clock = ManualClock()
    manager = CacheManager(clock=clock)
    manager.set('z', (0.97, 1e-4), ttl_seconds=10)
    assert manager.get('z') == (0.97, 1e-4)
    clock.now = 11.0
    assert manager.get('z') is None
    stats = manager.get_stats()
    assert stats['hits'] == 1 and stats['misses'] == 1
    assert stats['current_entries'] == 0


def test_keys_follow_domain_values():
    manager = CacheManager()
    first = manager._generate_key('normalizer', AxisBox.unit(2), np.array([1.0, 2.0]), seed=3)
    same = manager._generate_key('normalizer', AxisBox([0.0, 0.0], [1.0, 1.0]), np.array([1.0, 2.0]), seed=3)
    other = manager._generate_key('normalizer', AxisBox.unit(2), np.array([1.0, 2.0]), seed=4)
    assert first == same
    assert first != other


def test_delete_and_clear():
    manager = CacheManager()
    manager.set('a', 1)
    manager.set('b', 2)
    assert manager.delete('a') is True
    assert manager.delete('a') is False
    assert manager.clear_all() == 1
    assert manager.get_stats()['deletes'] == 2
