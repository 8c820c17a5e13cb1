"""
モンテカルロ推定

合成シャッフラー 𝒮^{-1}∘𝒮′ から m ラウンドの順列を引き、通信グラフの
連結成分数 C(G) の分布と E[q^{C(G)}] を推定する。試行は parallel.run_trials で
分割され、(seed, 試行番号) から導出した乱数を使う。
"""

import functools
import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from attrs import frozen

from ..errors import InvalidParameterError, SizeMismatchError
from ..parallel import run_trials
from ..permutations import DEFAULT_ENUMERATION_CAP
from ..shufflers import ShufflerModel, composed_round_model, model_size, sample_parallel_images
from .graphs import count_components_from_images

logger = logging.getLogger(__name__)

CONFIDENCE_SIGMAS = 3.0


@frozen
class ComponentHistogram:
    """C(G) の経験分布（counts[c] は C(G)=c となった試行数）"""
    n: int
    m: int
    trials: int
    counts: Tuple[int, ...]

    def probability(self, c: int) -> float:
        return self.counts[c] / self.trials if 0 <= c <= self.n else 0.0

    def half_width(self, c: int) -> float:
        """正規近似による 3σ 信頼半幅"""
        p = self.probability(c)
        return CONFIDENCE_SIGMAS * math.sqrt(p * (1.0 - p) / self.trials)

    def to_rows(self) -> List[Dict[str, Any]]:
        return [
            {"c": c, "count": self.counts[c], "probability": self.probability(c), "half_width": self.half_width(c)}
            for c in range(1, self.n + 1)
        ]


def _component_trial(index: int, rng: np.random.Generator, model: ShufflerModel, m: int, n: int, cap: int) -> int:
    return count_components_from_images(sample_parallel_images(model, m, rng, cap), n)


def _round_model(model: ShufflerModel, composed: bool) -> ShufflerModel:
    return composed_round_model(model, model) if composed else model


def empirical_component_dist(model: ShufflerModel, n: int, m: int, trials: int, seed: int,
                             workers: int = 1, composed: bool = True,
                             cap: int = DEFAULT_ENUMERATION_CAP) -> ComponentHistogram:
    """
    C(G) の経験分布

    Args:
        model: シャッフラーモデル
        n: 人数（モデルのサイズと一致すること）
        m: ラウンド数
        trials: 試行回数
        seed: 基底seed
        workers: 並列ワーカー数（結果には影響しない）
        composed: Trueなら 𝒮^{-1}∘𝒮′ から, Falseならモデル自身から引く

    Raises:
        SizeMismatchError: n がモデルのサイズと異なる場合
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m}")
    size = model_size(model)
    if size != n:
        raise SizeMismatchError(n, size, "shuffler size")

    trial = functools.partial(_component_trial, model=_round_model(model, composed), m=m, n=n, cap=cap)
    components = run_trials(trial, trials, seed, workers)
    counts = np.bincount(np.asarray(components, dtype=np.int64), minlength=n + 1)
    logger.info(f"Sampled {trials} communication graphs (n={n}, m={m}, workers={workers})")
    return ComponentHistogram(n=n, m=m, trials=trials, counts=tuple(int(c) for c in counts[: n + 1]))


def empirical_q_power(model: ShufflerModel, n: int, m: int, q: int, trials: int, seed: int,
                      workers: int = 1, composed: bool = True,
                      histogram: Optional[ComponentHistogram] = None,
                      cap: int = DEFAULT_ENUMERATION_CAP) -> Tuple[float, float]:
    """
    E[q^{C(G)}] の推定値と 3σ 信頼半幅

    Returns:
        (推定値, 半幅)
    """
    if histogram is None:
        histogram = empirical_component_dist(model, n, m, trials, seed, workers, composed, cap)
    probs = np.array([histogram.probability(c) for c in range(n + 1)])
    powers = np.array([float(q) ** c for c in range(n + 1)])
    mean = float(np.dot(probs, powers))
    variance = max(float(np.dot(probs, powers ** 2)) - mean ** 2, 0.0)
    return mean, CONFIDENCE_SIGMAS * math.sqrt(variance / histogram.trials)
