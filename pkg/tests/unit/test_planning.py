"""
パラメータ計画のユニットテスト
"""

import math

import pytest

from shufflesum.errors import InvalidParameterError, PreconditionError
from shufflesum.fieldcore import choose_modulus
from shufflesum.protocol import planning_report, required_messages, security_parameter, sigma_from_dp
from shufflesum.protocol.planning import gamma_limit, min_messages, precondition_checks


class TestSecurityParameter:
    """security_parameter のテスト"""

    def test_small_instance(self):
        """n=19, m=86, q=166, γ=0 → σ ≈ −23.15（安全性の保証なし）"""
        assert security_parameter(19, 86, 166, 0.0) == pytest.approx(-23.15, abs=0.01)

    def test_large_instance(self):
        """n=10^6, m=477, q=2·10^9, γ=0 → σ ≈ 40.06"""
        assert security_parameter(10 ** 6, 477, 2 * 10 ** 9, 0.0) == pytest.approx(40.06, abs=0.01)

    def test_too_few_messages(self):
        """m < 8e^{4γ} は前提違反"""
        with pytest.raises(PreconditionError) as excinfo:
            security_parameter(10 ** 6, 7, 2 * 10 ** 9, 0.0)
        assert excinfo.value.inequality == "m >= 8e^(4 gamma)"

    def test_too_few_players(self):
        """n < 19 は前提違反"""
        with pytest.raises(PreconditionError) as excinfo:
            security_parameter(18, 100, 153, 0.0)
        assert excinfo.value.inequality == "n >= 19"

    def test_modulus_precondition(self):
        """q の前提は n=19, q=166 で m=86 なら成立、m=85 なら不成立"""
        assert all(precondition_checks(19, 86, 166, 0.0).values())
        with pytest.raises(PreconditionError) as excinfo:
            security_parameter(19, 85, 166, 0.0)
        assert excinfo.value.inequality.startswith("ln q")

    def test_invalid_arguments(self):
        """負の γ などは引数エラー"""
        with pytest.raises(InvalidParameterError):
            security_parameter(100, 10, 2000, -0.1)

    @pytest.mark.parametrize("n", [10 ** 4, 10 ** 6])
    @pytest.mark.parametrize("gamma", [0.0, 0.01])
    def test_monotone(self, n, gamma):
        """m について狭義増加、q について減少"""
        q = choose_modulus(n)
        start = required_messages(n, gamma, 1)
        values = [security_parameter(n, m, q, gamma) for m in range(start, start + 50)]
        assert all(a < b for a, b in zip(values, values[1:]))
        assert security_parameter(n, start + 50, q, gamma) > security_parameter(n, start + 50, 2 * q, gamma)


class TestRequiredMessages:
    """required_messages のテスト"""

    def test_large_instance(self):
        """n=10^6, γ=0, σ=40 → m=477"""
        q = choose_modulus(10 ** 6)
        assert required_messages(10 ** 6, 0.0, 40) == 477
        assert security_parameter(10 ** 6, 476, q, 0.0) < 40

    @pytest.mark.parametrize("n,gamma,sigma", [
        (10 ** 6, 0.0, 1e-9),
        (10 ** 6, 0.02, 40),
        (100, 0.0, 20),
        (19, 0.0, 5),
    ])
    def test_minimal(self, n, gamma, sigma):
        """返す m で σ ≥ 目標、m−1 では目標未満か前提違反"""
        q = choose_modulus(n)
        m = required_messages(n, gamma, sigma)
        assert m >= min_messages(gamma)
        assert security_parameter(n, m, q, gamma) >= sigma
        previous_ok = all(precondition_checks(n, m - 1, q, gamma).values())
        assert not previous_ok or security_parameter(n, m - 1, q, gamma) < sigma

    def test_too_few_players(self):
        """n=18 は前提違反"""
        with pytest.raises(PreconditionError) as excinfo:
            required_messages(18, 0.0, 40)
        assert excinfo.value.inequality == "n >= 19"

    def test_gamma_out_of_range(self):
        """γ > (log₂ log₂ n)/80 は前提違反"""
        limit = gamma_limit(10 ** 6)
        assert limit == pytest.approx(math.log2(math.log2(10 ** 6)) / 80)
        with pytest.raises(PreconditionError):
            required_messages(10 ** 6, limit * 1.01, 40)

    def test_target_must_be_positive(self):
        """σ_target ≤ 0 は拒否"""
        with pytest.raises(InvalidParameterError):
            required_messages(10 ** 6, 0.0, 0)


class TestSigmaFromDp:
    """sigma_from_dp のテスト"""

    @pytest.mark.parametrize("epsilon,delta,expected", [
        (0.0, 2 ** -20, 20),
        (1.0, 2 ** -30, 31),
        (1.0, 0.9, 2),
    ])
    def test_examples(self, epsilon, delta, expected):
        """既知の値"""
        assert sigma_from_dp(epsilon, delta) == expected

    @pytest.mark.parametrize("epsilon", [0.0, 0.3, 1.0, 4.0])
    @pytest.mark.parametrize("delta", [1e-12, 1e-6, 0.01, 0.5])
    def test_smallest(self, epsilon, delta):
        """(1+e^ε)·2^{−σ−1} ≤ δ を満たす最小の σ"""
        sigma = sigma_from_dp(epsilon, delta)
        factor = 1.0 + math.exp(epsilon)
        assert factor * 2.0 ** (-sigma - 1) <= delta
        assert factor * 2.0 ** (-sigma) > delta

    @pytest.mark.parametrize("epsilon,delta", [(1.0, 0.0), (1.0, 1.0), (-0.5, 0.1)])
    def test_invalid(self, epsilon, delta):
        """δ ∉ (0,1), ε < 0 は拒否"""
        with pytest.raises(InvalidParameterError):
            sigma_from_dp(epsilon, delta)


class TestPlanningReport:
    """planning_report のテスト"""

    def test_report(self):
        """n=10^6, ε=1, δ=2^{−30}"""
        report = planning_report(10 ** 6, 1.0, 2 ** -30, 0.0)
        assert report.sigma_target == 31
        assert report.q == 2 * 10 ** 9
        assert report.p == pytest.approx(1000.0)
        assert report.security >= 31
        assert all(report.preconditions.values())
        assert report.to_dict()["m"] == report.m == required_messages(10 ** 6, 0.0, 31)
