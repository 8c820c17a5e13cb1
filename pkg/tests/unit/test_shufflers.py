"""
shufflers のユニットテスト
"""

import math
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from shufflesum.errors import EnumerationCapError, InvalidParameterError, SizeMismatchError, UnsupportedModelError
from shufflesum.permutations import Permutation, all_permutations, invert, swap_distance
from shufflesum.shufflers import (
    CayleyMallows,
    Composed,
    Inverted,
    PointMass,
    RoundPermutations,
    TimestampLaplace,
    Uniform,
    composed_round_model,
    exact_pmf,
    model_from_dict,
    model_to_dict,
    pmf_table,
    sample,
    sample_images,
    sample_parallel,
    verify_imperfectness,
)


def frequencies(model, samples, seed, cap=8):
    rng = np.random.default_rng(seed)
    return Counter(sample(model, rng, cap) for _ in range(samples))


def assert_uniform_by_chi_square(counts, n, samples, significance=1e-3):
    observed = [counts.get(pi, 0) for pi in all_permutations(n)]
    expected = [samples / math.factorial(n)] * len(observed)
    _, p_value = stats.chisquare(observed, expected)
    assert p_value > significance


class TestModelTypes:
    """モデル型の検証"""

    def test_mallows_default_center(self):
        """center 省略時は恒等順列"""
        assert CayleyMallows(3, 0.5).center == Permutation.identity(3)

    def test_mallows_rejects_negative_dispersion(self):
        """γ′ < 0 は拒否"""
        with pytest.raises(InvalidParameterError):
            CayleyMallows(3, -0.1)

    def test_mallows_center_size(self):
        """center のサイズ不一致"""
        with pytest.raises(SizeMismatchError):
            CayleyMallows(3, 0.5, [1, 2])

    def test_timestamp_validation(self):
        """γ > 0, オフセットは [0,1] で n 個"""
        with pytest.raises(InvalidParameterError):
            TimestampLaplace(2, 0.0, [0.0, 1.0])
        with pytest.raises(InvalidParameterError):
            TimestampLaplace(2, 1.0, [0.0, 1.5])
        with pytest.raises(SizeMismatchError):
            TimestampLaplace(3, 1.0, [0.0, 1.0])
        assert TimestampLaplace(2, 4.0, [0.0, 1.0]).scale == 0.5

    def test_composed_size_mismatch(self):
        """サイズの異なるモデルは合成できない"""
        with pytest.raises(SizeMismatchError):
            Composed(Uniform(3), Uniform(4))
        with pytest.raises(SizeMismatchError):
            composed_round_model(Uniform(3), Uniform(4))

    def test_round_permutations(self):
        """ラウンド列のサイズ検証"""
        rounds = RoundPermutations([Permutation.identity(3), Permutation([2, 1, 3])])
        assert rounds.n == 3 and rounds.m == 2 and len(rounds) == 2
        with pytest.raises(SizeMismatchError):
            RoundPermutations([Permutation.identity(3), Permutation.identity(2)])
        with pytest.raises(InvalidParameterError):
            RoundPermutations([])


class TestSampling:
    """サンプリングのテスト"""

    def test_deterministic_given_rng_state(self):
        """同じ乱数状態からは同じ順列"""
        model = CayleyMallows(6, 0.4)
        assert sample(model, np.random.default_rng(5)) == sample(model, np.random.default_rng(5))

    def test_uniform_n2_frequencies(self):
        """Uniform n=2: 各順列の頻度 0.5 ± 0.01"""
        counts = frequencies(Uniform(2), 100_000, seed=1)
        for pi in all_permutations(2):
            assert abs(counts[pi] / 100_000 - 0.5) < 0.01

    def test_uniform_n4_chi_square(self):
        """Uniform n=4 は 24 通りに一様"""
        assert_uniform_by_chi_square(frequencies(Uniform(4), 48_000, seed=2), 4, 48_000)

    def test_point_mass(self):
        """PointMass は常に同じ順列"""
        sigma = Permutation([3, 1, 2])
        rng = np.random.default_rng(0)
        assert all(sample(PointMass(sigma), rng) == sigma for _ in range(10))

    @pytest.mark.parametrize("cap", [8, 3])
    def test_mallows_matches_pmf(self, cap):
        """逆CDF法（cap=8）と挿入法（cap=3）の両方が厳密pmfに従う"""
        model = CayleyMallows(4, 0.7, [2, 1, 4, 3])
        samples = 60_000
        counts = frequencies(model, samples, seed=3, cap=cap)
        table = pmf_table(model)
        perms = all_permutations(4)
        observed = [counts.get(pi, 0) for pi in perms]
        expected = [table[pi] * samples for pi in perms]
        _, p_value = stats.chisquare(observed, expected)
        assert p_value > 1e-3

    def test_mallows_large_n_uses_insertion(self):
        """n > cap でも列挙せずにサンプリングできる"""
        pi = sample(CayleyMallows(200, 1.0), np.random.default_rng(0))
        assert pi.n == 200

    def test_timestamp_all_equal_is_uniform(self):
        """全員同時刻なら到着順は一様"""
        model = model_from_dict({"variant": "timestamp_laplace", "gamma": 1.0, "offsets": "all-equal"}, 4)
        assert_uniform_by_chi_square(frequencies(model, 48_000, seed=4), 4, 48_000)

    def test_timestamp_small_noise_keeps_order(self):
        """雑音が小さければ送信順がそのまま到着順になりやすい"""
        model = TimestampLaplace(3, 20.0, [0.0, 0.5, 1.0])
        counts = frequencies(model, 10_000, seed=5)
        assert counts[Permutation.identity(3)] / 10_000 > 0.5

    def test_inverted_and_composed(self):
        """Inverted は逆順列、Composed は outer∘inner"""
        sigma = Permutation([2, 3, 1])
        tau = Permutation([1, 3, 2])
        rng = np.random.default_rng(0)
        assert sample(Inverted(PointMass(sigma)), rng) == invert(sigma)
        assert sample(Composed(PointMass(sigma), PointMass(tau)), rng) == Permutation([2, 1, 3])

    def test_sample_parallel_rounds(self):
        """m ラウンドを独立に引き、m < 1 は拒否"""
        rounds = sample_parallel(Uniform(5), 3, np.random.default_rng(0))
        assert rounds.m == 3 and rounds.n == 5
        with pytest.raises(InvalidParameterError):
            sample_parallel(Uniform(5), 0, np.random.default_rng(0))

    def test_sample_images_zero_based(self):
        """sample_images は0始まりの像配列"""
        images = sample_images(PointMass([2, 1]), np.random.default_rng(0))
        assert images.tolist() == [1, 0]


class TestExactPmf:
    """厳密pmfのテスト"""

    def test_mallows_n2(self):
        """n=2, γ′=ln2: pmf(id)=2/3, pmf(swap)=1/3"""
        model = CayleyMallows(2, math.log(2))
        assert exact_pmf(model, Permutation([1, 2])) == pytest.approx(2 / 3)
        assert exact_pmf(model, Permutation([2, 1])) == pytest.approx(1 / 3)

    @pytest.mark.parametrize("model", [
        Uniform(5),
        CayleyMallows(6, 0.3),
        CayleyMallows(5, 1.2, [5, 4, 3, 2, 1]),
        PointMass([3, 1, 2]),
        Inverted(CayleyMallows(4, 0.8, [2, 3, 4, 1])),
        Composed(CayleyMallows(4, 0.5), Uniform(4)),
    ])
    def test_sums_to_one(self, model):
        """pmf の総和は 1"""
        assert sum(pmf_table(model).values()) == pytest.approx(1.0)

    def test_mallows_proportional_to_distance(self):
        """pmf(π)/pmf(center) = e^{−γ′·Swap(π, center)}"""
        center = Permutation([2, 1, 3, 4])
        model = CayleyMallows(4, 0.9, center)
        table = pmf_table(model)
        for pi, mass in table.items():
            assert mass / table[center] == pytest.approx(math.exp(-0.9 * swap_distance(pi, center)))

    def test_composed_point_masses(self):
        """𝒮=𝒮′=PointMass{σ} のとき 𝒮^{-1}∘𝒮′ は恒等順列に集中"""
        sigma = PointMass([3, 1, 2])
        assert exact_pmf(composed_round_model(sigma, sigma), Permutation.identity(3)) == pytest.approx(1.0)

    def test_composed_uniform(self):
        """一様同士の合成は一様"""
        table = pmf_table(composed_round_model(Uniform(3), Uniform(3)))
        assert all(mass == pytest.approx(1 / 6) for mass in table.values())

    def test_timestamp_unsupported(self):
        """TimestampLaplace に厳密pmfはない"""
        with pytest.raises(UnsupportedModelError):
            pmf_table(TimestampLaplace(3, 1.0, [0.0, 0.5, 1.0]))

    def test_cap_and_size_checks(self):
        """上限超過とサイズ不一致"""
        with pytest.raises(EnumerationCapError):
            pmf_table(Uniform(9))
        with pytest.raises(SizeMismatchError):
            exact_pmf(Uniform(3), Permutation.identity(2))


class TestVerifyImperfectness:
    """γ-不完全性の検証"""

    def test_mallows_attains_dispersion(self):
        """CayleyMallows n=4, γ′=0.3 の最大比は 0.3"""
        report = verify_imperfectness(CayleyMallows(4, 0.3))
        assert report.max_log_ratio_per_swap == pytest.approx(0.3, abs=1e-9)
        assert report.passes(0.3)
        assert not report.passes(0.29)
        assert not report.estimate

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("dispersion", [0.1, 0.3])
    def test_mallows_dispersion_grid(self, n, dispersion):
        """n ≤ 5 のすべてで CayleyMallows の最大比は γ′ に一致"""
        report = verify_imperfectness(CayleyMallows(n, dispersion))
        assert report.max_log_ratio_per_swap == pytest.approx(dispersion, abs=1e-9)
        assert report.passes(dispersion)

    def test_uniform_is_zero_imperfect(self):
        """一様シャッフラーは 0-不完全"""
        assert verify_imperfectness(Uniform(4)).max_log_ratio_per_swap == pytest.approx(0.0, abs=1e-12)

    def test_point_mass_is_not_imperfect(self):
        """PointMass は有限のγでは不完全にならない"""
        report = verify_imperfectness(PointMass([2, 1, 3]))
        assert math.isinf(report.max_log_ratio_per_swap)
        assert report.witness is not None

    @pytest.mark.parametrize("s", [
        PointMass([3, 1, 2, 4]),
        CayleyMallows(4, 1.5, [4, 3, 2, 1]),
        Uniform(4),
    ])
    def test_postprocessing_preserves_dispersion(self, s):
        """𝒮′ が γ′-不完全なら 𝒮^{-1}∘𝒮′ も γ′-不完全"""
        report = verify_imperfectness(composed_round_model(s, CayleyMallows(4, 0.4)))
        assert report.passes(0.4)

    @pytest.mark.parametrize("s_prime", [
        PointMass([3, 1, 2, 4]),
        Uniform(4),
        CayleyMallows(4, 1.0, [4, 3, 2, 1]),
    ])
    def test_imperfect_outer_round_bounds_composition(self, s_prime):
        """𝒮 が γ-不完全なら 𝒮′ によらず 𝒮^{-1}∘𝒮′ も γ-不完全"""
        report = verify_imperfectness(composed_round_model(CayleyMallows(4, 0.3), s_prime))
        assert report.passes(0.3)

    def test_inverted_keeps_dispersion(self):
        """逆順列を取っても γ′ は変わらない"""
        report = verify_imperfectness(Inverted(CayleyMallows(4, 0.6, [2, 3, 4, 1])))
        assert report.max_log_ratio_per_swap == pytest.approx(0.6, abs=1e-9)

    def test_monte_carlo_estimate(self):
        """経験頻度による推定は厳密値に近い"""
        report = verify_imperfectness(CayleyMallows(3, 0.5), mode="monte_carlo", samples=200_000,
                                      rng=np.random.default_rng(6))
        assert report.estimate and report.samples == 200_000
        assert report.max_log_ratio_per_swap == pytest.approx(0.5, abs=0.1)

    def test_timestamp_monte_carlo_within_gamma(self):
        """TimestampLaplace（全員同時刻）の推定値は γ 以下に収まる"""
        model = TimestampLaplace(3, 1.0, [0.5, 0.5, 0.5])
        report = verify_imperfectness(model, mode="monte_carlo", samples=120_000, rng=np.random.default_rng(7))
        assert report.passes(1.0)

    def test_unknown_mode(self):
        """未知のモードは拒否"""
        with pytest.raises(InvalidParameterError):
            verify_imperfectness(Uniform(3), mode="bogus")


class TestModelDescriptors:
    """モデル記述子との相互変換"""

    @pytest.mark.parametrize("model", [
        Uniform(3),
        CayleyMallows(3, 0.25, [3, 2, 1]),
        TimestampLaplace(3, 2.0, [0.0, 0.5, 1.0]),
        PointMass([2, 1, 3]),
        Inverted(Uniform(3)),
        Composed(Inverted(PointMass([2, 3, 1])), CayleyMallows(3, 0.1)),
    ])
    def test_descriptor_reconstructs_model(self, model):
        """model_to_dict の結果から同じモデルが得られる"""
        assert model_from_dict(model_to_dict(model), model.n) == model

    def test_defaults(self):
        """オフセット省略時は等間隔、center 省略時は恒等順列"""
        ts = model_from_dict({"variant": "timestamp_laplace", "gamma": 1.0}, 3)
        assert ts.offsets == (0.0, 0.5, 1.0)
        assert model_from_dict({"variant": "cayley_mallows", "dispersion": 0.1}, 3).center.is_identity()

    @pytest.mark.parametrize("descriptor", [
        {"variant": "nope"},
        {"variant": "cayley_mallows"},
        {"variant": "timestamp_laplace"},
        {"n": 3},
        "uniform",
    ])
    def test_invalid_descriptors(self, descriptor):
        """不正な記述子は拒否"""
        with pytest.raises(InvalidParameterError):
            model_from_dict(descriptor, 3)
