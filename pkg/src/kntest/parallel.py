"""Deterministic per-replication random streams and an optional thread pool."""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

FAST_STREAM = 0
SLOW_STREAM = 1
MC_STREAM = 2
RANK_STREAM = 3


def substream(seed, *key):
    """Generator for the stream identified by ``(seed, *key)``.

    Streams depend only on their key, never on the order in which they are
    requested, so results do not depend on scheduling.
    """
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def worker_count(threads=None):
    """Number of workers: explicit value, else ``KNT_THREADS`` (0 = all cores), else 1."""
    if threads is None:
        env = os.environ.get("KNT_THREADS", "").strip()
        threads = int(env) if env else 1
    if threads <= 0:
        threads = os.cpu_count() or 1
    return int(threads)


def pmap(fn, items, threads=None):
    """``[fn(x) for x in items]``, possibly spread over threads, order preserved."""
    items = list(items)
    n_workers = min(worker_count(threads), max(len(items), 1))
    if n_workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))


def derive_seed(seed, *key):
    """A 64-bit seed for the sub-task identified by ``(seed, *key)``."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
