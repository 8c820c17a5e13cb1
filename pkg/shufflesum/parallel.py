"""
試行単位の並列実行

各試行は (seed, 試行番号) から導出した乱数で実行されるため、
結果はワーカー数やチャンク分割に依存しない。
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List

import numpy as np

from .seeding import derive_rng

logger = logging.getLogger(__name__)

TrialFn = Callable[[int, np.random.Generator], Any]


def _run_chunk(fn: TrialFn, seed: int, start: int, stop: int) -> List[Any]:
    return [fn(index, derive_rng(seed, index)) for index in range(start, stop)]


def run_trials(fn: TrialFn, trials: int, seed: int, workers: int = 1) -> List[Any]:
    """
    試行を実行し、試行番号順の結果リストを返す

    Args:
        fn: fn(trial_index, rng) を返すモジュールレベル関数（プロセス間でpickle可能であること）
        trials: 試行回数
        seed: 基底seed
        workers: ワーカー数（1ならプロセスを起動せずに逐次実行）

    Returns:
        試行番号順の結果
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if workers <= 1 or trials < 2 * workers:
        return _run_chunk(fn, seed, 0, trials)

    bounds = np.linspace(0, trials, workers + 1).astype(int)
    logger.debug(f"Splitting {trials} trials across {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_chunk, fn, seed, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo
        ]
        results: List[Any] = []
        for future in futures:
            results.extend(future.result())
    return results
