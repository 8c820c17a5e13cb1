"""
確率上界の計算

- disconnect_bound: 部分集合 S と補集合の間に辺がない確率の上界
- component_bound: C(G) = c となる確率 p(n, c) の上界
- q_power_expectation_bound: E[q^{C(G)}] の上界（モンテカルロ推定を併記可能）

1を超える上界はクランプせず、そのまま返して vacuous とする。
"""

import logging
import math
from typing import Any, Dict, List, Optional, Tuple

from attrs import asdict, field, frozen

from ..errors import InvalidParameterError, PreconditionError
from ..permutations import DEFAULT_ENUMERATION_CAP
from ..protocol.planning import precondition_checks
from ..shufflers import PointMass, ShufflerModel
from .estimators import ComponentHistogram, empirical_component_dist, empirical_q_power

logger = logging.getLogger(__name__)

COMPARISON_TOLERANCE = 1e-9


@frozen
class BoundReport:
    """上界と、要求された場合の経験的推定値"""
    bound: float
    preconditions: Dict[str, bool]
    estimate: Optional[float] = None
    half_width: Optional[float] = None
    vacuous: bool = False
    notes: Tuple[str, ...] = field(default=(), converter=tuple)

    def exceeded(self) -> Optional[bool]:
        """推定値が上界を超えたか（推定なしならNone）"""
        if self.estimate is None:
            return None
        return self.estimate - (self.half_width or 0.0) > self.bound + COMPARISON_TOLERANCE

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_gamma(gamma: float) -> None:
    if not gamma >= 0.0 or math.isinf(gamma):
        raise InvalidParameterError(f"gamma must be a finite value >= 0, got {gamma}")


def _log_comb(n: int, k: int) -> float:
    return math.log(math.comb(n, k))


def disconnect_bound(n: int, s: int, m: int, gamma: float, k: Optional[int] = None) -> BoundReport:
    """
    |S| = s の部分集合が m ラウンドを通じて補集合と辺を持たない確率の上界

    適用できる上界の最小値を返す:
    - e^{2smγ}·C(n,s)^{−m}（s ≤ n/2）
    - e^{2(n−s)mγ}·C(n,s)^{−m}（s ≥ n/2）
    - e^{kmγ}·C(⌊n/2⌋,k)^{−m}（k を省略した場合は 0 ≤ k ≤ min(s, n−s) のすべて）

    Raises:
        InvalidParameterError: s ∉ [1, n−1] または k が範囲外の場合
    """
    if not 1 <= s <= n - 1:
        raise InvalidParameterError(f"subset size must satisfy 1 <= s <= n-1, got s={s}, n={n}")
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m}")
    _check_gamma(gamma)
    k_max = min(s, n - s)
    if k is not None and not 0 <= k <= k_max:
        raise InvalidParameterError(f"k must satisfy 0 <= k <= {k_max}, got {k}")

    log_candidates: List[float] = []
    if 2 * s <= n:
        log_candidates.append(2 * s * m * gamma - m * _log_comb(n, s))
    if 2 * s >= n:
        log_candidates.append(2 * (n - s) * m * gamma - m * _log_comb(n, s))
    for kk in ([k] if k is not None else range(k_max + 1)):
        log_candidates.append(kk * m * gamma - m * _log_comb(n // 2, kk))

    bound = math.exp(min(log_candidates))
    return BoundReport(bound=bound, preconditions={"1 <= s <= n-1": True}, vacuous=bound > 1.0)


def component_bound(n: int, c: int, m: int, gamma: float) -> float:
    """
    p(n, c) ≤ 2^{c−1}/c!·(e/n)^{(m−1)(c−1)/(32e^{4γ})}·e^{2γ(m−1)(c−1)}

    1を超える値もそのまま返す。

    Raises:
        PreconditionError: n < 19 または m < 8e^{4γ} の場合
        InvalidParameterError: c ∉ [1, n] の場合
    """
    _check_gamma(gamma)
    if n < 19:
        raise PreconditionError("n >= 19", f"n={n}")
    if m < 8.0 * math.exp(4.0 * gamma):
        raise PreconditionError("m >= 8e^(4 gamma)", f"m={m}, gamma={gamma}")
    if not 1 <= c <= n:
        raise InvalidParameterError(f"component count must satisfy 1 <= c <= n, got {c}")
    steps = (m - 1) * (c - 1)
    log_value = ((c - 1) * math.log(2.0) - math.lgamma(c + 1)
                 + steps / (32.0 * math.exp(4.0 * gamma)) * (1.0 - math.log(n))
                 + 2.0 * gamma * steps)
    return math.exp(log_value)


def q_power_expectation_bound(n: int, m: int, q: int, gamma: float,
                              model: Optional[ShufflerModel] = None, trials: int = 0, seed: int = 0,
                              workers: int = 1, composed: bool = True,
                              cap: int = DEFAULT_ENUMERATION_CAP) -> BoundReport:
    """
    E[q^{C(G)}] ≤ q + 3q²·e^{2γ(m−1)}·(e/n)^{(m−1)/(32e^{4γ})}

    model と trials > 0 を与えるとモンテカルロ推定を併記する。

    Raises:
        PreconditionError: n ≥ 19, m ≥ 8e^{4γ}, q の前提のいずれかが成り立たない場合
    """
    _check_gamma(gamma)
    checks = precondition_checks(n, m, q, gamma)
    for inequality, holds in checks.items():
        if not holds:
            raise PreconditionError(inequality, f"n={n}, m={m}, q={q}, gamma={gamma}")

    bound = q + 3.0 * q * q * math.exp(
        2.0 * gamma * (m - 1) + (m - 1) / (32.0 * math.exp(4.0 * gamma)) * (1.0 - math.log(n))
    )
    if model is None or trials <= 0:
        return BoundReport(bound=bound, preconditions=checks)

    estimate, half_width = empirical_q_power(model, n, m, q, trials, seed, workers, composed, cap=cap)
    notes: List[str] = []
    if estimate - half_width > bound + COMPARISON_TOLERANCE:
        notes.append("empirical estimate exceeds the bound")
    if isinstance(model, PointMass):
        notes.append("PointMass is not gamma-imperfect for any finite gamma")
    return BoundReport(bound=bound, preconditions=checks, estimate=estimate, half_width=half_width,
                       notes=notes)


@frozen
class ComponentBoundRow:
    c: int
    estimate: float
    half_width: float
    bound: float
    holds: bool


@frozen
class ComponentBoundCheck:
    """c ≥ 2 のすべてについての経験分布と component_bound の比較"""
    rows: Tuple[ComponentBoundRow, ...]
    histogram: ComponentHistogram

    @property
    def passed(self) -> bool:
        return all(row.holds for row in self.rows)

    def to_rows(self) -> List[Dict[str, Any]]:
        return [asdict(row) for row in self.rows]


def verify_component_bound(model: ShufflerModel, n: int, m: int, gamma: float, trials: int, seed: int,
                           workers: int = 1, composed: bool = True,
                           cap: int = DEFAULT_ENUMERATION_CAP) -> ComponentBoundCheck:
    """
    p̂(c) − 半幅 ≤ component_bound(n, c, m, γ) を c = 2..n で確認する

    Raises:
        PreconditionError: component_bound の前提を満たさない場合
    """
    bounds = [component_bound(n, c, m, gamma) for c in range(2, n + 1)]
    histogram = empirical_component_dist(model, n, m, trials, seed, workers, composed, cap)
    rows = []
    for c, bound in zip(range(2, n + 1), bounds):
        estimate = histogram.probability(c)
        half_width = histogram.half_width(c)
        rows.append(ComponentBoundRow(
            c=c,
            estimate=estimate,
            half_width=half_width,
            bound=bound,
            holds=estimate - half_width <= bound + COMPARISON_TOLERANCE,
        ))
    check = ComponentBoundCheck(rows=tuple(rows), histogram=histogram)
    logger.info(f"Component bound check (n={n}, m={m}, gamma={gamma}): passed={check.passed}")
    return check
