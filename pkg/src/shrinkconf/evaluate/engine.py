"""Block-parallel replication engine.

Replications are cut into fixed blocks of ``numkit.BLOCK_SIZE``; each block
draws from its own Philox stream keyed by (base_seed, stream_id, block), and
per-block partial sums are reduced in block order. Results are therefore
bitwise identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..numkit import BLOCK_SIZE, SeedSpec, n_blocks


def default_workers() -> int:
    env = os.environ.get("SS_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def map_blocks(fn, n_rep: int, seed: SeedSpec, workers: int | None = None):
    """Run ``fn(gen, n)`` for every block and sum the returned arrays in block order.

    ``fn`` receives the block's generator and the number of replications in
    it, and returns a 1-D array (or scalar) of partial sums.
    """
    if n_rep < 1:
        raise ValueError("n_rep must be >= 1")
    workers = default_workers() if workers is None else max(1, int(workers))
    nb = n_blocks(n_rep)

    def run(b):
        n = min(BLOCK_SIZE, n_rep - b * BLOCK_SIZE)
        return np.atleast_1d(np.asarray(fn(seed.block_generator(b), n), dtype=float))

    if workers == 1 or nb == 1:
        parts = [run(b) for b in range(nb)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(nb)))
    total = np.zeros_like(parts[0])
    for part in parts:
        total = total + part
    return total


def proportion(hits: float, n: int) -> tuple[float, float]:
    est = hits / n
    return est, float(np.sqrt(max(est * (1.0 - est), 0.0) / n))


def mean_se(s1: float, s2: float, n: int) -> tuple[float, float]:
    """Mean and its standard error from the sum and sum of squares."""
    m = s1 / n
    var = max(s2 / n - m * m, 0.0) * n / max(n - 1, 1)
    return m, float(np.sqrt(var / n))
