"""
パラメータ計画

統計的安全性の式

    σ = (m−1)·((log₂n − log₂e)/(64e^{4γ}) − 2γ·log₂e) − 3·log₂(3q)

の評価と逆算（必要なメッセージ数 m）、(ε, δ) から σ への変換を行う。
式が成り立つ前提:
- n ≥ 19
- m ≥ 8e^{4γ}
- ln q ≤ (m−1)/(32e^{4γ})·ln(n/e) + 2γ(1−m)
"""

import logging
import math
from typing import Any, Dict

from attrs import asdict, frozen

from ..errors import InvalidParameterError, PreconditionError
from ..fieldcore import choose_modulus

logger = logging.getLogger(__name__)

LOG2E = math.log2(math.e)
MIN_PLAYERS = 19


def gamma_limit(n: int) -> float:
    """計画で許す最大の γ = (log₂ log₂ n)/80"""
    return math.log2(math.log2(n)) / 80.0


def min_messages(gamma: float) -> int:
    """⌈8e^{4γ}⌉"""
    return math.ceil(8.0 * math.exp(4.0 * gamma))


def q_log_limit(n: int, m: int, gamma: float) -> float:
    """前提が許す ln q の上限"""
    return (m - 1) / (32.0 * math.exp(4.0 * gamma)) * math.log(n / math.e) + 2.0 * gamma * (1 - m)


def precondition_checks(n: int, m: int, q: int, gamma: float) -> Dict[str, bool]:
    """前提ごとの成否（キーは不等式）"""
    checks = {"n >= 19": n >= MIN_PLAYERS}
    checks["m >= 8e^(4 gamma)"] = m >= 8.0 * math.exp(4.0 * gamma)
    if n >= 2:
        checks["ln q <= (m-1)/(32e^(4 gamma)) ln(n/e) + 2 gamma (1-m)"] = math.log(q) <= q_log_limit(n, m, gamma)
    else:
        checks["ln q <= (m-1)/(32e^(4 gamma)) ln(n/e) + 2 gamma (1-m)"] = False
    return checks


def _validate_basic(n: int, m: int, q: int, gamma: float) -> None:
    if n < 1 or m < 1:
        raise InvalidParameterError(f"n and m must be >= 1, got n={n}, m={m}")
    if q < 2:
        raise InvalidParameterError(f"modulus must be >= 2, got {q}")
    if not gamma >= 0.0 or math.isinf(gamma):
        raise InvalidParameterError(f"gamma must be a finite value >= 0, got {gamma}")


def _sigma_formula(n: int, m: int, q: int, gamma: float) -> float:
    return (m - 1) * ((math.log2(n) - LOG2E) / (64.0 * math.exp(4.0 * gamma)) - 2.0 * gamma * LOG2E) \
        - 3.0 * math.log2(3 * q)


def security_parameter(n: int, m: int, q: int, gamma: float) -> float:
    """
    σ（ビット）を評価する

    値が0以下なら「保証される安全性なし」を意味する。

    Raises:
        PreconditionError: 前提の不等式が成り立たない場合（破れた不等式を保持）
    """
    _validate_basic(n, m, q, gamma)
    for inequality, holds in precondition_checks(n, m, q, gamma).items():
        if not holds:
            raise PreconditionError(inequality, f"n={n}, m={m}, q={q}, gamma={gamma}")
    return _sigma_formula(n, m, q, gamma)


def _sigma_slope(n: int, gamma: float) -> float:
    return (math.log2(n) - LOG2E) / (64.0 * math.exp(4.0 * gamma)) - 2.0 * gamma * LOG2E


def required_messages(n: int, gamma: float, sigma_target: float) -> int:
    """
    σ(n, m, choose_modulus(n), γ) ≥ σ_target かつ前提を満たす最小の m

    Raises:
        PreconditionError: n < 19, γ > (log₂ log₂ n)/80, またはσがmについて増加しない場合
        InvalidParameterError: σ_target ≤ 0 の場合
    """
    if n < MIN_PLAYERS:
        raise PreconditionError("n >= 19", f"n={n}")
    if not gamma >= 0.0:
        raise InvalidParameterError(f"gamma must be >= 0, got {gamma}")
    if gamma > gamma_limit(n):
        raise PreconditionError("gamma <= (log2 log2 n)/80", f"gamma={gamma}, limit={gamma_limit(n):.6g}")
    if not sigma_target > 0.0:
        raise InvalidParameterError(f"target security must be > 0, got {sigma_target}")
    if _sigma_slope(n, gamma) <= 0.0:
        raise PreconditionError("(log2 n - log2 e)/(64e^(4 gamma)) > 2 gamma log2 e", f"n={n}, gamma={gamma}")

    q = choose_modulus(n)

    def feasible(m: int) -> bool:
        return all(precondition_checks(n, m, q, gamma).values()) and _sigma_formula(n, m, q, gamma) >= sigma_target

    low = min_messages(gamma)
    high = low
    while not feasible(high):
        high *= 2
    # 条件はmについて単調なので [low, high] を二分探索する
    while low < high:
        mid = (low + high) // 2
        if feasible(mid):
            high = mid
        else:
            low = mid + 1
    logger.debug(f"required_messages(n={n}, gamma={gamma}, sigma={sigma_target}) = {low}")
    return low


def sigma_from_dp(epsilon: float, delta: float) -> int:
    """
    (1+e^ε)·2^{−σ−1} ≤ δ を満たす最小の整数 σ

    Raises:
        InvalidParameterError: ε < 0 または δ ∉ (0,1) の場合
    """
    if not epsilon >= 0.0 or math.isinf(epsilon):
        raise InvalidParameterError(f"epsilon must be a finite value >= 0, got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    factor = 1.0 + math.exp(epsilon)
    sigma = math.ceil(math.log2(factor / delta) - 1.0)
    # 浮動小数点誤差の補正
    while factor * 2.0 ** (-sigma - 1) > delta:
        sigma += 1
    while factor * 2.0 ** (-sigma) <= delta:
        sigma -= 1
    return int(sigma)


@frozen
class PlanningReport:
    """(n, ε, δ, γ) から導いたプロトコルパラメータ"""
    n: int
    epsilon: float
    delta: float
    gamma: float
    sigma_target: int
    m: int
    q: int
    p: float
    security: float
    preconditions: Dict[str, bool]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def planning_report(n: int, epsilon: float, delta: float, gamma: float) -> PlanningReport:
    """
    σ = sigma_from_dp(ε, δ), m = required_messages(n, γ, σ), q = choose_modulus(n), p = √n

    Raises:
        PreconditionError: 計画の前提を満たさない場合
    """
    sigma = sigma_from_dp(epsilon, delta)
    m = required_messages(n, gamma, sigma)
    q = choose_modulus(n)
    report = PlanningReport(
        n=n,
        epsilon=epsilon,
        delta=delta,
        gamma=gamma,
        sigma_target=sigma,
        m=m,
        q=q,
        p=math.sqrt(n),
        security=_sigma_formula(n, m, q, gamma),
        preconditions=precondition_checks(n, m, q, gamma),
    )
    logger.info(f"Planned parameters for n={n}: sigma={sigma}, m={m}, q={q}")
    return report
