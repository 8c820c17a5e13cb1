"""
Shufflers - 順列上の分布（シャッフラーモデル）

γ-不完全シャッフラー: すべての π, π′ について
P[S=π] ≤ e^{γ·Swap(π,π′)}·P[S=π′] を満たす順列の分布。

モデル:
- Uniform: 一様シャッフル
- CayleyMallows: pmf(π) ∝ exp(−γ′·Swap(π, center))（厳密pmfを持つγ′-不完全モデル）
- TimestampLaplace: 送信時刻 t_i + τ_i（τ_i はスケール2/γのラプラス分布）の到着順
- PointMass: 固定順列
- Inverted: 基底モデルから引いた順列の逆
- Composed: outer∘inner（それぞれ独立に引いて合成）

機能:
- sample / sample_parallel: 乱数状態を明示的に受け取るサンプリング
- exact_pmf / pmf_table: 厳密pmf（列挙可能なモデルのみ）
- verify_imperfectness: max ln(pmf(π)/pmf(π′))/Swap(π,π′) の厳密計算・推定
- composed_round_model: 𝒮^{-1}∘𝒮′ の構成
- model_from_dict / model_to_dict: 実験設定JSONとの相互変換
"""

import functools
import logging
import math
from collections import Counter
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from attrs import field, frozen

from .errors import InvalidParameterError, SizeMismatchError, UnsupportedModelError
from .permutations import (
    DEFAULT_ENUMERATION_CAP,
    Permutation,
    all_permutations,
    compose,
    count_cycles,
    invert,
    swap_distance,
)
from .seeding import derive_rng, split_key

logger = logging.getLogger(__name__)


def _positive_size(instance, attribute, value) -> None:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise InvalidParameterError(f"{attribute.name} must be a positive integer, got {value!r}")


def _float_tuple(values: Sequence[float]) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


def _as_permutation(value) -> Permutation:
    return value if isinstance(value, Permutation) else Permutation(value)


@frozen
class Uniform:
    """一様シャッフラー"""
    n: int = field(validator=_positive_size)


@frozen
class CayleyMallows:
    """Swap距離に基づくMallowsモデル（center省略時は恒等順列）"""
    n: int = field(validator=_positive_size)
    dispersion: float = field(converter=float)
    center: Permutation = field(converter=_as_permutation)

    @center.default
    def _identity_center(self) -> Permutation:
        return Permutation.identity(self.n)

    def __attrs_post_init__(self):
        if not self.dispersion >= 0.0 or math.isinf(self.dispersion):
            raise InvalidParameterError(f"dispersion must be a finite value >= 0, got {self.dispersion}")
        if self.center.n != self.n:
            raise SizeMismatchError(self.n, self.center.n, "center size")


@frozen
class TimestampLaplace:
    """時刻オフセット t_i にラプラス雑音（スケール2/γ）を加えた到着順"""
    n: int = field(validator=_positive_size)
    gamma: float = field(converter=float)
    offsets: Tuple[float, ...] = field(converter=_float_tuple)

    def __attrs_post_init__(self):
        if not self.gamma > 0.0 or math.isinf(self.gamma):
            raise InvalidParameterError(
                f"timestamp shuffler needs 0 < gamma < inf (Laplace scale 2/gamma), got {self.gamma}"
            )
        if len(self.offsets) != self.n:
            raise SizeMismatchError(self.n, len(self.offsets), "offset count")
        for t in self.offsets:
            if not 0.0 <= t <= 1.0:
                raise InvalidParameterError(f"timestamp offsets must lie in [0, 1], got {t}")

    @property
    def scale(self) -> float:
        return 2.0 / self.gamma


@frozen
class PointMass:
    """固定順列（γ-不完全ではない）"""
    permutation: Permutation = field(converter=_as_permutation)

    @property
    def n(self) -> int:
        return self.permutation.n


@frozen
class Inverted:
    """基底モデルの逆順列"""
    base: Any

    @property
    def n(self) -> int:
        return model_size(self.base)


@frozen
class Composed:
    """outer∘inner（独立に引いて合成）"""
    outer: Any
    inner: Any

    def __attrs_post_init__(self):
        a, b = model_size(self.outer), model_size(self.inner)
        if a != b:
            raise SizeMismatchError(a, b, "model size")

    @property
    def n(self) -> int:
        return model_size(self.outer)


ShufflerModel = Union[Uniform, CayleyMallows, TimestampLaplace, PointMass, Inverted, Composed]
MODEL_TYPES = (Uniform, CayleyMallows, TimestampLaplace, PointMass, Inverted, Composed)


@frozen
class RoundPermutations:
    """m-並列シャッフルの各ラウンドの順列"""
    rounds: Tuple[Permutation, ...] = field(converter=tuple)

    def __attrs_post_init__(self):
        if not self.rounds:
            raise InvalidParameterError("at least one round is required")
        n = self.rounds[0].n
        for pi in self.rounds:
            if pi.n != n:
                raise SizeMismatchError(n, pi.n, "round permutation size")

    @property
    def n(self) -> int:
        return self.rounds[0].n

    @property
    def m(self) -> int:
        return len(self.rounds)

    def __iter__(self):
        return iter(self.rounds)

    def __len__(self) -> int:
        return len(self.rounds)


@frozen
class ImperfectnessReport:
    """γ-不完全性の検証結果"""
    max_log_ratio_per_swap: float
    witness: Optional[Tuple[Permutation, Permutation]]
    estimate: bool
    samples: Optional[int] = None

    def passes(self, gamma: float, tolerance: float = 1e-9) -> bool:
        return self.max_log_ratio_per_swap <= gamma + tolerance


def model_size(model: ShufflerModel) -> int:
    """モデルが扱う順列のサイズ n"""
    if not isinstance(model, MODEL_TYPES):
        raise InvalidParameterError(f"not a shuffler model: {model!r}")
    return model.n


def model_name(model: ShufflerModel) -> str:
    return type(model).__name__


# ========================================
# サンプリング
# ========================================

def _sample_mallows_insertion(n: int, dispersion: float, rng: np.random.Generator) -> np.ndarray:
    # 巡回表記への逐次挿入: 要素jは確率 1/(1+j·e^{-γ′}) で新しい巡回を作り、
    # それ以外は既存のj要素のいずれかの直後に入る（距離が1増える）
    weight = math.exp(-dispersion)
    succ = np.arange(n, dtype=np.int64)
    for j in range(1, n):
        if rng.random() * (1.0 + j * weight) < 1.0:
            continue
        k = int(rng.integers(0, j))
        succ[j] = succ[k]
        succ[k] = j
    return succ


def _sample_images(model: ShufflerModel, rng: np.random.Generator, cap: int) -> np.ndarray:
    """0始まりの像配列を1つ引く"""
    if isinstance(model, Uniform):
        return rng.permutation(model.n)
    elif isinstance(model, PointMass):
        return model.permutation.zero_based()
    elif isinstance(model, CayleyMallows):
        if model.n <= cap:
            perms, cumulative = _cumulative_table(model, cap)
            index = int(np.searchsorted(cumulative, rng.random(), side="right"))
            return perms[min(index, len(perms) - 1)].zero_based()
        sigma = _sample_mallows_insertion(model.n, model.dispersion, rng)
        return model.center.zero_based()[sigma]
    elif isinstance(model, TimestampLaplace):
        arrival = np.asarray(model.offsets) + rng.laplace(0.0, model.scale, model.n)
        # 同時刻はプレイヤー番号順（stable sort）
        order = np.argsort(arrival, kind="stable")
        ranks = np.empty(model.n, dtype=np.int64)
        ranks[order] = np.arange(model.n)
        return ranks
    elif isinstance(model, Inverted):
        base = _sample_images(model.base, rng, cap)
        inverse = np.empty_like(base)
        inverse[base] = np.arange(base.size)
        return inverse
    elif isinstance(model, Composed):
        outer = _sample_images(model.outer, rng, cap)
        inner = _sample_images(model.inner, rng, cap)
        return outer[inner]
    raise InvalidParameterError(f"not a shuffler model: {model!r}")


def sample_images(model: ShufflerModel, rng: np.random.Generator,
                  cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """sample の高速版（0始まりnumpy配列を返す）"""
    return _sample_images(model, rng, cap)


def sample(model: ShufflerModel, rng: np.random.Generator,
           cap: int = DEFAULT_ENUMERATION_CAP) -> Permutation:
    """
    モデルから順列を1つ引く

    Args:
        model: シャッフラーモデル
        rng: 呼び出し側が所有する乱数状態
        cap: CayleyMallowsで列挙による逆CDF法を使うnの上限

    Returns:
        順列（同じ乱数状態からは同じ結果）
    """
    return Permutation.from_zero_based(_sample_images(model, rng, cap))


def sample_parallel_images(model: ShufflerModel, m: int, rng: np.random.Generator,
                           cap: int = DEFAULT_ENUMERATION_CAP) -> List[np.ndarray]:
    """sample_parallel の高速版"""
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise InvalidParameterError(f"number of rounds must be >= 1, got {m!r}")
    base = split_key(rng)
    return [_sample_images(model, derive_rng(base, j), cap) for j in range(int(m))]


def sample_parallel(model: ShufflerModel, m: int, rng: np.random.Generator,
                    cap: int = DEFAULT_ENUMERATION_CAP) -> RoundPermutations:
    """
    m-並列シャッフル: ラウンドごとに独立な順列を引く

    各ラウンドの乱数は (基底キー, ラウンド番号) から導出する。

    Raises:
        InvalidParameterError: m < 1 の場合
    """
    images = sample_parallel_images(model, m, rng, cap)
    return RoundPermutations([Permutation.from_zero_based(a) for a in images])


# ========================================
# 厳密pmf
# ========================================

def _mallows_normalizer(n: int, dispersion: float) -> float:
    weight = math.exp(-dispersion)
    return math.prod(1.0 + j * weight for j in range(1, n))


@functools.lru_cache(maxsize=64)
def _pmf_table_cached(model: ShufflerModel, cap: int) -> Dict[Permutation, float]:
    n = model_size(model)
    perms = all_permutations(n, cap)
    if isinstance(model, Uniform):
        mass = 1.0 / math.factorial(n)
        return {pi: mass for pi in perms}
    elif isinstance(model, PointMass):
        return {pi: (1.0 if pi == model.permutation else 0.0) for pi in perms}
    elif isinstance(model, CayleyMallows):
        z = _mallows_normalizer(n, model.dispersion)
        return {pi: math.exp(-model.dispersion * swap_distance(pi, model.center)) / z for pi in perms}
    elif isinstance(model, Inverted):
        base = _pmf_table_cached(model.base, cap)
        return {pi: base[invert(pi)] for pi in perms}
    elif isinstance(model, Composed):
        outer = _pmf_table_cached(model.outer, cap)
        inner = _pmf_table_cached(model.inner, cap)
        table = dict.fromkeys(perms, 0.0)
        inner_support = [(s, b) for s, b in inner.items() if b > 0.0]
        for rho, a in outer.items():
            if a == 0.0:
                continue
            for sigma, b in inner_support:
                table[compose(rho, sigma)] += a * b
        return table
    elif isinstance(model, TimestampLaplace):
        raise UnsupportedModelError("TimestampLaplace")
    raise InvalidParameterError(f"not a shuffler model: {model!r}")


def pmf_table(model: ShufflerModel, cap: int = DEFAULT_ENUMERATION_CAP) -> Dict[Permutation, float]:
    """
    全順列上の厳密pmf

    Raises:
        UnsupportedModelError: TimestampLaplace（閉形式のpmfがない）を含む場合
        EnumerationCapError: n > cap の場合
    """
    return _pmf_table_cached(model, cap)


@functools.lru_cache(maxsize=16)
def _cumulative_table(model: CayleyMallows, cap: int) -> Tuple[List[Permutation], np.ndarray]:
    table = _pmf_table_cached(model, cap)
    perms = list(table)
    return perms, np.cumsum([table[p] for p in perms])


def exact_pmf(model: ShufflerModel, pi: Permutation, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """
    P[S = π]

    Raises:
        SizeMismatchError: πのサイズがモデルと異なる場合
        UnsupportedModelError: TimestampLaplace を含む場合
    """
    n = model_size(model)
    if pi.n != n:
        raise SizeMismatchError(n, pi.n, "permutation size")
    return pmf_table(model, cap)[pi]


# ========================================
# γ-不完全性の検証
# ========================================

def _max_log_ratio(masses: Dict[Permutation, float]) -> Tuple[float, Optional[Tuple[Permutation, Permutation]]]:
    perms = list(masses)
    inverses = [invert(p).images for p in perms]
    n = perms[0].n if perms else 0
    best = 0.0
    witness = None
    for a_index, a in enumerate(perms):
        pa = masses[a]
        if pa <= 0.0:
            continue
        for b_index, b in enumerate(perms):
            if a_index == b_index:
                continue
            pb = masses[b]
            if pb <= 0.0:
                return math.inf, (a, b)
            b_inv = inverses[b_index]
            distance = n - count_cycles([b_inv[v - 1] for v in a.images])
            ratio = (math.log(pa) - math.log(pb)) / distance
            if witness is None or ratio > best:
                best, witness = ratio, (a, b)
    return max(best, 0.0), witness


def verify_imperfectness(model: ShufflerModel, mode: str = "exact", samples: int = 100_000,
                         rng: Optional[np.random.Generator] = None,
                         cap: int = DEFAULT_ENUMERATION_CAP) -> ImperfectnessReport:
    """
    max over (π,π′) of ln(pmf(π)/pmf(π′)) / Swap(π,π′) を求める

    モデルがγ-不完全であるのはこの値が γ 以下のとき。分母の確率が0なら+∞。

    Args:
        model: シャッフラーモデル
        mode: "exact"（厳密pmf）または "monte_carlo"（経験頻度による推定）
        samples: monte_carlo のサンプル数
        rng: monte_carlo の乱数状態

    Returns:
        ImperfectnessReport（monte_carlo では estimate=True）

    Raises:
        UnsupportedModelError: exact で厳密pmfがないモデルの場合
    """
    if mode == "exact":
        masses = pmf_table(model, cap)
        value, witness = _max_log_ratio(masses)
        logger.debug(f"Exact imperfectness of {model_name(model)}: {value}")
        return ImperfectnessReport(value, witness, estimate=False)
    elif mode == "monte_carlo":
        if samples < 1:
            raise InvalidParameterError(f"samples must be >= 1, got {samples}")
        rng = rng if rng is not None else np.random.default_rng(0)
        n = model_size(model)
        counts = Counter(tuple(int(v) for v in _sample_images(model, rng, cap)) for _ in range(samples))
        if n <= cap:
            universe = {pi: 0.0 for pi in all_permutations(n, cap)}
        else:
            universe = {}
        for images, count in counts.items():
            universe[Permutation.from_zero_based(images)] = count / samples
        value, witness = _max_log_ratio(universe)
        logger.info(f"Estimated imperfectness of {model_name(model)} from {samples} samples: {value}")
        return ImperfectnessReport(value, witness, estimate=True, samples=samples)
    raise InvalidParameterError(f"unknown verification mode: {mode}")


def composed_round_model(s: ShufflerModel, s_prime: ShufflerModel) -> Composed:
    """
    𝒮^{-1}∘𝒮′ を表すモデル（2回の独立な実行の比較に現れるシャッフラー）

    Raises:
        SizeMismatchError: サイズが異なる場合
    """
    a, b = model_size(s), model_size(s_prime)
    if a != b:
        raise SizeMismatchError(a, b, "model size")
    return Composed(outer=Inverted(s), inner=s_prime)


# ========================================
# 実験設定JSONとの相互変換
# ========================================

def _offsets_from_descriptor(raw: Any, n: int) -> List[float]:
    if raw == "all-equal":
        return [0.5] * n
    if raw == "equispaced":
        return [0.0] if n == 1 else [i / (n - 1) for i in range(n)]
    if isinstance(raw, list):
        return [float(t) for t in raw]
    raise InvalidParameterError(f"offsets must be a list, 'all-equal' or 'equispaced', got {raw!r}")


def _permutation_from_descriptor(raw: Any, n: int) -> Permutation:
    if raw is None or raw == "identity":
        return Permutation.identity(n)
    if isinstance(raw, list):
        return Permutation(raw)
    raise InvalidParameterError(f"permutation must be a list or 'identity', got {raw!r}")


def model_from_dict(descriptor: Dict[str, Any], n: int) -> ShufflerModel:
    """
    実験設定のモデル記述子からモデルを生成

    Args:
        descriptor: {"variant": "uniform" | "cayley_mallows" | "timestamp_laplace" |
                     "point_mass" | "inverted" | "composed", ...}
        n: 人数（記述子に"n"がなければこれを使う）

    Raises:
        InvalidParameterError: 記述子が不正な場合
    """
    if not isinstance(descriptor, dict) or "variant" not in descriptor:
        raise InvalidParameterError(f"model descriptor must be an object with 'variant', got {descriptor!r}")
    variant = descriptor["variant"]
    size = int(descriptor.get("n", n))

    if variant == "uniform":
        return Uniform(size)
    elif variant == "cayley_mallows":
        if "dispersion" not in descriptor:
            raise InvalidParameterError("cayley_mallows requires 'dispersion'")
        center = _permutation_from_descriptor(descriptor.get("center"), size)
        return CayleyMallows(size, descriptor["dispersion"], center)
    elif variant == "timestamp_laplace":
        if "gamma" not in descriptor:
            raise InvalidParameterError("timestamp_laplace requires 'gamma'")
        offsets = _offsets_from_descriptor(descriptor.get("offsets", "equispaced"), size)
        return TimestampLaplace(size, descriptor["gamma"], offsets)
    elif variant == "point_mass":
        return PointMass(_permutation_from_descriptor(descriptor.get("permutation"), size))
    elif variant == "inverted":
        return Inverted(model_from_dict(descriptor["base"], size))
    elif variant == "composed":
        return Composed(model_from_dict(descriptor["outer"], size), model_from_dict(descriptor["inner"], size))
    raise InvalidParameterError(f"unknown shuffler variant: {variant}")


def model_to_dict(model: ShufflerModel) -> Dict[str, Any]:
    """モデルを実験設定の記述子に変換"""
    if isinstance(model, Uniform):
        return {"variant": "uniform", "n": model.n}
    elif isinstance(model, CayleyMallows):
        return {"variant": "cayley_mallows", "n": model.n, "dispersion": model.dispersion,
                "center": list(model.center.images)}
    elif isinstance(model, TimestampLaplace):
        return {"variant": "timestamp_laplace", "n": model.n, "gamma": model.gamma,
                "offsets": list(model.offsets)}
    elif isinstance(model, PointMass):
        return {"variant": "point_mass", "n": model.n, "permutation": list(model.permutation.images)}
    elif isinstance(model, Inverted):
        return {"variant": "inverted", "base": model_to_dict(model.base)}
    elif isinstance(model, Composed):
        return {"variant": "composed", "outer": model_to_dict(model.outer), "inner": model_to_dict(model.inner)}
    raise InvalidParameterError(f"not a shuffler model: {model!r}")
