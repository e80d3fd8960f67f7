"""Counter-based random streams and block-parallel replicate evaluation.

Replicates are split into fixed-size blocks; block ``k`` of a computation
tagged ``tag`` always draws from ``SeedSequence(seed, spawn_key=(tag, k))``.
Results therefore do not depend on how many worker threads run the blocks.
"""

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_SIZE = 512
THREADS_ENV = "MINKFIELD_THREADS"


def check_seed(seed):
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be a non-negative integer, got {seed!r}")
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return int(seed)


def tag_key(tag):
    if isinstance(tag, (int, np.integer)):
        return int(tag)
    return zlib.crc32(str(tag).encode())


def stream(seed, *key):
    """Generator for the stream addressed by ``(seed, *key)``."""
    spawn_key = tuple(tag_key(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(check_seed(seed), spawn_key=spawn_key))


def n_threads():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def block_sizes(n_paths, block_size=BLOCK_SIZE):
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    full, rest = divmod(int(n_paths), block_size)
    return [block_size] * full + ([rest] if rest else [])


def map_blocks(fn, n_paths, seed, *key, block_size=BLOCK_SIZE):
    """Evaluate ``fn(rng, n_block)`` for every block and return results in block order."""
    sizes = block_sizes(n_paths, block_size)
    jobs = [(stream(seed, *key, k), size) for k, size in enumerate(sizes)]
    threads = n_threads()
    if threads == 1 or len(jobs) == 1:
        return [fn(rng, size) for rng, size in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
