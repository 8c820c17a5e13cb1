"""
実数の総和推定

各プレイヤーの x_i ∈ [0,1] を精度 p = √n で乱択丸めし、差がDLapになる
Polya雑音を加えて Z_q に埋め込み、split-and-mix で集計した総和を復号する。
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from attrs import frozen

from ..errors import InvalidParameterError
from ..fieldcore import FieldVec, choose_modulus
from ..noise import NoiseParams, expected_abs_dlap, randomized_round, randomized_round_many, sample_polya
from ..permutations import DEFAULT_ENUMERATION_CAP
from ..shufflers import ShufflerModel
from .planning import required_messages, sigma_from_dp
from .split_and_mix import aggregate, run_field_protocol

logger = logging.getLogger(__name__)


@frozen
class SummationResult:
    """1回の総和推定の結果"""
    estimate: float
    true_sum: float
    abs_error: float
    n: int
    m: int
    q: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimate": self.estimate,
            "true_sum": self.true_sum,
            "abs_error": self.abs_error,
            "n": self.n,
            "m": self.m,
            "q": self.q,
        }


@frozen(eq=False)
class VectorSummationResult:
    """座標ごとの総和推定の結果"""
    coordinates: tuple
    epsilon_per_coordinate: float
    m: int

    @property
    def estimates(self) -> np.ndarray:
        return np.array([c.estimate for c in self.coordinates])

    @property
    def abs_errors(self) -> np.ndarray:
        return np.array([c.abs_error for c in self.coordinates])


def _check_epsilon(epsilon: float) -> None:
    if not epsilon > 0.0 or math.isinf(epsilon):
        raise InvalidParameterError(f"epsilon must be a finite value > 0, got {epsilon}")


def field_encode(z: int, n: int) -> int:
    """整数 z を Z_q（q = choose_modulus(n)）に埋め込む（負の値は折り返す）"""
    return int(z) % choose_modulus(n)


def encode_real(x: float, epsilon: float, n: int, rng: np.random.Generator, add_noise: bool = True) -> int:
    """
    x を Z_q の要素に符号化

    y = randomized_round(x, √n) に Polya(1/n, α) − Polya(1/n, α)（α = e^{−ε/√n}）を加え mod q をとる。

    Args:
        x: 入力（[0,1]）
        epsilon: プライバシーパラメータ ε > 0
        n: 人数
        rng: 乱数状態
        add_noise: Falseなら雑音を加えない（テスト専用）

    Raises:
        InvalidParameterError: x ∉ [0,1]・ε ≤ 0・n < 1 の場合
    """
    params = NoiseParams.for_players(n, epsilon)
    y = randomized_round(x, params.p_precision, rng)
    noise = 0
    if add_noise:
        noise = sample_polya(params.r, params.alpha, rng) - sample_polya(params.r, params.alpha, rng)
    return field_encode(y + noise, n)


def encode_many(xs: Sequence[float], epsilon: float, rng: np.random.Generator, add_noise: bool = True) -> FieldVec:
    """全プレイヤーの入力をまとめて符号化"""
    n = len(xs)
    params = NoiseParams.for_players(n, epsilon)
    q = choose_modulus(n)
    y = randomized_round_many(xs, params.p_precision, rng)
    if add_noise:
        y = y + sample_polya(params.r, params.alpha, rng, size=n) - sample_polya(params.r, params.alpha, rng, size=n)
    return FieldVec.from_ints((int(v) for v in y), q)


def decode_sum(z: int, n: int) -> float:
    """
    集計値 Z を実数の総和推定に復号

    Z ≤ 3np/2 なら Z/p, それ以外は (Z − q)/p（p = √n）。

    Raises:
        InvalidParameterError: Z ∉ [0, q) の場合
    """
    q = choose_modulus(n)
    if not 0 <= int(z) < q:
        raise InvalidParameterError(f"aggregate {z} outside [0, {q})")
    p = math.sqrt(n)
    z = int(z)
    if z <= 1.5 * n * p:
        return z / p
    return (z - q) / p


def run_real_summation(xs: Sequence[float], epsilon: float, model: ShufflerModel, m: int,
                       rng: np.random.Generator, add_noise: bool = True,
                       cap: int = DEFAULT_ENUMERATION_CAP) -> SummationResult:
    """
    実数入力の総和を推定する（符号化 → split-and-mix → 集計 → 復号）

    Args:
        xs: 各プレイヤーの入力（[0,1]）
        epsilon: ε
        model: シャッフラーモデル（サイズは len(xs)）
        m: 1人あたりのメッセージ数
        rng: 乱数状態
        add_noise: Falseなら雑音なし（テスト専用）

    Returns:
        SummationResult
    """
    _check_epsilon(epsilon)
    n = len(xs)
    if n < 1:
        raise InvalidParameterError("at least one player is required")
    inputs = encode_many(xs, epsilon, rng, add_noise)
    transcript = run_field_protocol(inputs, m, model, rng, cap)
    estimate = decode_sum(aggregate(transcript), n)
    true_sum = float(math.fsum(xs))
    return SummationResult(
        estimate=estimate,
        true_sum=true_sum,
        abs_error=abs(estimate - true_sum),
        n=n,
        m=int(m),
        q=inputs.q,
    )


def run_vector_summation(xs: Any, epsilon: float, delta: float, model: ShufflerModel,
                         rng: np.random.Generator, m: Optional[int] = None, gamma: float = 0.0,
                         add_noise: bool = True, cap: int = DEFAULT_ENUMERATION_CAP) -> VectorSummationResult:
    """
    n×d 行列の列ごとの総和を推定する

    各座標は ε′ = ε/d で独立に run_real_summation を実行する（基本合成定理）。
    m を省略した場合は (ε′, δ′ = δ/d, γ) から必要なメッセージ数を求める。

    Raises:
        InvalidParameterError: d = 0 の場合
        PreconditionError: m の計画に必要な前提（n ≥ 19 など）を満たさない場合
    """
    _check_epsilon(epsilon)
    matrix = np.asarray(xs, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] == 0:
        raise InvalidParameterError(f"expected an n x d matrix with d >= 1, got shape {matrix.shape}")
    n, d = matrix.shape
    epsilon_d = epsilon / d
    if m is None:
        if not 0.0 < delta < 1.0:
            raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
        m = required_messages(n, gamma, sigma_from_dp(epsilon_d, delta / d))
        logger.info(f"Planned m={m} for d={d} coordinates (epsilon'={epsilon_d:.6g})")
    coordinates: List[SummationResult] = [
        run_real_summation(list(matrix[:, k]), epsilon_d, model, m, rng, add_noise, cap)
        for k in range(d)
    ]
    return VectorSummationResult(tuple(coordinates), epsilon_d, int(m))


def reference_abs_error(epsilon: float, n: int) -> float:
    """雑音による期待絶対誤差 E|DLap(e^{−ε/√n})|/√n（丸め誤差は含まない）"""
    params = NoiseParams.for_players(n, epsilon)
    return expected_abs_dlap(params.alpha) / params.p_precision
