"""
シャッフルによるプライバシー増幅

局所的に ε₀-DP なランダマイザの出力を一様シャッフルすると、中央モデルで
(ε, δ)-DP になる。γ-不完全シャッフラーの場合は ε に γ を加える。
対数はすべて自然対数。
"""

import logging
import math

from attrs import asdict, frozen

from ..errors import InvalidParameterError, PreconditionError

logger = logging.getLogger(__name__)


@frozen
class AmplificationResult:
    epsilon_shuffle: float
    epsilon_imperfect: float
    epsilon0_limit: float

    def to_dict(self):
        return asdict(self)


def epsilon0_limit(n: int, delta: float) -> float:
    """増幅定理が使える ε₀ の上限 ln(n/(16·ln(2/δ)))"""
    return math.log(n / (16.0 * math.log(2.0 / delta)))


def amplification_bound(epsilon0: float, n: int, delta: float, gamma: float = 0.0) -> AmplificationResult:
    """
    ε = ln(1 + ((e^{ε₀}−1)/(e^{ε₀}+1))·8√(e^{ε₀}·ln(4/δ))/√n), 不完全シャッフラーでは ε + γ

    Raises:
        PreconditionError: ε₀ > ln(n/(16·ln(2/δ))) の場合
        InvalidParameterError: ε₀ < 0, n < 1, δ ∉ (0,1), γ < 0 の場合
    """
    if not epsilon0 >= 0.0 or math.isinf(epsilon0):
        raise InvalidParameterError(f"epsilon0 must be a finite value >= 0, got {epsilon0}")
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    if not gamma >= 0.0:
        raise InvalidParameterError(f"gamma must be >= 0, got {gamma}")

    limit = epsilon0_limit(n, delta)
    if epsilon0 > limit:
        raise PreconditionError("epsilon0 <= ln(n / (16 ln(2/delta)))", f"epsilon0={epsilon0}, limit={limit:.6g}")

    e0 = math.exp(epsilon0)
    epsilon = math.log1p((e0 - 1.0) / (e0 + 1.0) * 8.0 * math.sqrt(e0 * math.log(4.0 / delta)) / math.sqrt(n))
    logger.debug(f"Amplified epsilon0={epsilon0} over n={n}: epsilon={epsilon}")
    return AmplificationResult(epsilon_shuffle=epsilon, epsilon_imperfect=epsilon + gamma, epsilon0_limit=limit)
