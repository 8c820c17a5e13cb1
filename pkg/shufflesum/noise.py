"""
Noise - 乱択丸めと離散雑音分布

実数入力を精度 p で整数に丸め、Polya 雑音（差をとると離散ラプラスになる）を
加えるための分布と、その検定を提供する。

機能:
- randomized_round: ⌊xp⌋ + Bernoulli(xp − ⌊xp⌋)
- polya_pmf / polya_cdf / sample_polya: Polya(r, p)（負の二項分布, 実数形状r）
- dlap_pmf / dlap_cdf / sample_dlap: 離散ラプラス DLap(α)
- binned_chi_square: 裾のビン併合つきカイ二乗適合度検定
- polya_dlap_equivalence_test: Σ(Polya(1/n,α) − Polya(1/n,α)′) ~ DLap(α) の検定
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from attrs import field, frozen
from scipy import special, stats

from .errors import InvalidParameterError

logger = logging.getLogger(__name__)

DEFAULT_SIGNIFICANCE = 1e-3
MIN_EXPECTED_PER_BIN = 5.0

IntOrArray = Union[int, np.ndarray]


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")


def _check_polya(r: float, p_param: float) -> None:
    if not r > 0.0:
        raise InvalidParameterError(f"Polya shape r must be > 0, got {r}")
    if not 0.0 < p_param < 1.0:
        raise InvalidParameterError(f"Polya parameter p must lie in (0, 1), got {p_param}")


@frozen
class NoiseParams:
    """雑音と丸めのパラメータ"""
    alpha: float = field(converter=float)
    r: float = field(converter=float)
    p_precision: float = field(converter=float)

    def __attrs_post_init__(self):
        _check_alpha(self.alpha)
        if not self.r > 0.0:
            raise InvalidParameterError(f"r must be > 0, got {self.r}")
        if not self.p_precision >= 1.0:
            raise InvalidParameterError(f"precision must be >= 1, got {self.p_precision}")

    @classmethod
    def for_players(cls, n: int, epsilon: float) -> "NoiseParams":
        """p = √n, α = e^{−ε/p}, r = 1/n"""
        if n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {n}")
        if not epsilon > 0.0:
            raise InvalidParameterError(f"epsilon must be > 0, got {epsilon}")
        precision = math.sqrt(n)
        return cls(alpha=math.exp(-epsilon / precision), r=1.0 / n, p_precision=precision)


@frozen
class GoodnessOfFitReport:
    """カイ二乗適合度検定の結果"""
    statistic: float
    p_value: float
    passed: bool
    bins: int
    significance: float = DEFAULT_SIGNIFICANCE


# ========================================
# 乱択丸め
# ========================================

def randomized_round(x: float, p: float, rng: np.random.Generator) -> int:
    """
    ⌊xp⌋ + Bernoulli(xp − ⌊xp⌋)（期待値は xp）

    Raises:
        InvalidParameterError: x ∉ [0,1] または p < 1 の場合
    """
    if not 0.0 <= x <= 1.0:
        raise InvalidParameterError(f"input must lie in [0, 1], got {x}")
    if not p >= 1.0:
        raise InvalidParameterError(f"precision must be >= 1, got {p}")
    scaled = x * p
    base = math.floor(scaled)
    return int(base + (rng.random() < scaled - base))


def randomized_round_many(xs: Sequence[float], p: float, rng: np.random.Generator) -> np.ndarray:
    """randomized_round のベクトル版"""
    values = np.asarray(xs, dtype=float)
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise InvalidParameterError("inputs must lie in [0, 1]")
    if not p >= 1.0:
        raise InvalidParameterError(f"precision must be >= 1, got {p}")
    scaled = values * p
    base = np.floor(scaled)
    return (base + (rng.random(values.shape) < scaled - base)).astype(np.int64)


# ========================================
# Polya(r, p)
# ========================================

def polya_pmf(r: float, p_param: float, k: IntOrArray) -> Union[float, np.ndarray]:
    """binom(k+r−1, k)·p^k·(1−p)^r（k < 0 では0）"""
    _check_polya(r, p_param)
    ks = np.asarray(k, dtype=float)
    safe = np.maximum(ks, 0.0)
    log_mass = (special.gammaln(safe + r) - special.gammaln(r) - special.gammaln(safe + 1.0)
                + safe * math.log(p_param) + r * math.log1p(-p_param))
    mass = np.where(ks < 0, 0.0, np.exp(log_mass))
    return float(mass) if mass.ndim == 0 else mass


def polya_cdf(r: float, p_param: float, k: IntOrArray) -> Union[float, np.ndarray]:
    """P[Polya(r,p) ≤ k]"""
    _check_polya(r, p_param)
    # scipyのnbinomは成功確率を引数にとる
    value = stats.nbinom.cdf(k, r, 1.0 - p_param)
    return float(value) if np.ndim(value) == 0 else value


def sample_polya(r: float, p_param: float, rng: np.random.Generator,
                 size: Optional[Union[int, Tuple[int, ...]]] = None) -> IntOrArray:
    """
    Polya(r, p) のサンプル（ガンマ・ポアソン混合）

    λ ~ Gamma(shape=r, scale=p/(1−p)) を引き、Poisson(λ) を返す。
    """
    _check_polya(r, p_param)
    lam = rng.gamma(shape=r, scale=p_param / (1.0 - p_param), size=size)
    draws = rng.poisson(lam)
    return int(draws) if size is None else draws.astype(np.int64)


# ========================================
# DLap(α)
# ========================================

def dlap_pmf(alpha: float, k: IntOrArray) -> Union[float, np.ndarray]:
    """(1−α)/(1+α)·α^{|k|}"""
    _check_alpha(alpha)
    mass = (1.0 - alpha) / (1.0 + alpha) * np.power(alpha, np.abs(np.asarray(k, dtype=float)))
    return float(mass) if np.ndim(mass) == 0 else mass


def dlap_cdf(alpha: float, k: IntOrArray) -> Union[float, np.ndarray]:
    """P[Z ≤ k] = α^{|k|}/(1+α)（k<0）, 1 − α^{k+1}/(1+α)（k≥0）"""
    _check_alpha(alpha)
    ks = np.floor(np.asarray(k, dtype=float))
    below = np.power(alpha, np.abs(ks)) / (1.0 + alpha)
    above = 1.0 - np.power(alpha, np.maximum(ks, -1.0) + 1.0) / (1.0 + alpha)
    value = np.where(ks < 0, below, above)
    return float(value) if value.ndim == 0 else value


def _dlap_inverse_cdf(alpha: float, u: np.ndarray) -> np.ndarray:
    log_alpha = math.log(alpha)
    negative = u <= alpha / (1.0 + alpha)
    result = np.empty(u.shape, dtype=np.int64)
    result[negative] = -np.floor(np.log(u[negative] * (1.0 + alpha)) / log_alpha)
    rest = u[~negative]
    result[~negative] = np.maximum(0.0, np.ceil(np.log((1.0 - rest) * (1.0 + alpha)) / log_alpha) - 1.0)
    return result


def sample_dlap(alpha: float, rng: np.random.Generator,
                size: Optional[Union[int, Tuple[int, ...]]] = None,
                method: str = "geometric") -> IntOrArray:
    """
    DLap(α) のサンプル

    Args:
        alpha: 0 < α < 1
        rng: 乱数状態
        size: 省略時はスカラー
        method: "geometric"（幾何分布2つの差）または "inverse_cdf"

    Raises:
        InvalidParameterError: αまたはmethodが不正な場合
    """
    _check_alpha(alpha)
    shape = () if size is None else size
    if method == "geometric":
        draws = rng.geometric(1.0 - alpha, size=shape) - rng.geometric(1.0 - alpha, size=shape)
    elif method == "inverse_cdf":
        u = rng.uniform(np.finfo(float).tiny, 1.0, size=shape)
        draws = _dlap_inverse_cdf(alpha, np.atleast_1d(u)).reshape(np.shape(u))
    else:
        raise InvalidParameterError(f"unknown DLap sampling method: {method}")
    draws = np.asarray(draws, dtype=np.int64)
    return int(draws) if size is None else draws


def expected_abs_dlap(alpha: float) -> float:
    """E|Z| = 2α/(1−α²)"""
    _check_alpha(alpha)
    return 2.0 * alpha / (1.0 - alpha * alpha)


# ========================================
# 適合度検定
# ========================================

def _merge_bins(observed: List[float], expected: List[float]) -> Tuple[List[float], List[float]]:
    merged_obs: List[float] = []
    merged_exp: List[float] = []
    acc_obs = acc_exp = 0.0
    for o, e in zip(observed, expected):
        acc_obs += o
        acc_exp += e
        if acc_exp >= MIN_EXPECTED_PER_BIN:
            merged_obs.append(acc_obs)
            merged_exp.append(acc_exp)
            acc_obs = acc_exp = 0.0
    if acc_exp > 0.0 or acc_obs > 0.0:
        if merged_exp:
            merged_obs[-1] += acc_obs
            merged_exp[-1] += acc_exp
        else:
            merged_obs.append(acc_obs)
            merged_exp.append(acc_exp)
    return merged_obs, merged_exp


def binned_chi_square(samples: Sequence[int], pmf: Callable[[np.ndarray], np.ndarray],
                      cdf: Callable[[int], float],
                      significance: float = DEFAULT_SIGNIFICANCE) -> GoodnessOfFitReport:
    """
    整数値サンプルの離散分布へのカイ二乗適合度検定

    観測範囲 [min, max] の各整数をビンとし、両端は裾（≤min, ≥max）を含める。
    期待度数が5未満のビンは隣と併合する。

    Raises:
        InvalidParameterError: 併合後のビンが2つ未満になる場合
    """
    values = np.asarray(samples, dtype=np.int64)
    total = values.size
    if total == 0:
        raise InvalidParameterError("no samples to test")
    lo, hi = int(values.min()), int(values.max())
    if hi == lo:
        hi = lo + 1
    support = np.arange(lo, hi + 1)
    probs = np.asarray(pmf(support), dtype=float)
    probs[0] = cdf(lo)
    probs[-1] = 1.0 - cdf(hi - 1)
    counts = np.bincount(values - lo, minlength=support.size).astype(float)

    observed, expected = _merge_bins(list(counts), list(probs * total))
    if len(expected) < 2:
        raise InvalidParameterError(
            f"{total} samples are too few for the binning rule (expected >= {MIN_EXPECTED_PER_BIN:g} per bin)"
        )
    f_exp = np.asarray(expected)
    f_exp *= total / f_exp.sum()
    statistic, p_value = stats.chisquare(np.asarray(observed), f_exp)
    passed = bool(p_value > significance)
    logger.debug(f"Chi-square over {len(expected)} bins: statistic={statistic:.4f}, p={p_value:.4g}")
    return GoodnessOfFitReport(float(statistic), float(p_value), passed, len(expected), significance)


def polya_dlap_equivalence_test(n: int, alpha: float, trials: int, rng: np.random.Generator,
                                significance: float = DEFAULT_SIGNIFICANCE,
                                null_alpha: Optional[float] = None) -> GoodnessOfFitReport:
    """
    Σ_{i=1}^n (Polya(1/n,α)_i − Polya(1/n,α)′_i) が DLap(α) に従うことの検定

    Args:
        n: 人数
        alpha: 雑音のα
        trials: サンプル数
        rng: 乱数状態
        significance: 有意水準
        null_alpha: 帰無分布に使うα（検出力の確認用, 省略時はalpha）

    Raises:
        InvalidParameterError: 引数が不正, またはtrialsがビン分割に足りない場合
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    _check_alpha(alpha)
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    null = alpha if null_alpha is None else null_alpha
    _check_alpha(null)

    r = 1.0 / n
    positive = sample_polya(r, alpha, rng, size=(trials, n)).sum(axis=1)
    negative = sample_polya(r, alpha, rng, size=(trials, n)).sum(axis=1)
    report = binned_chi_square(
        positive - negative,
        lambda k: dlap_pmf(null, k),
        lambda k: dlap_cdf(null, k),
        significance,
    )
    logger.info(f"Polya/DLap equivalence (n={n}, alpha={alpha}, null={null}): p={report.p_value:.4g}")
    return report
