"""
seeding / parallel のユニットテスト
"""

import numpy as np
import pytest

from shufflesum.parallel import run_trials
from shufflesum.seeding import as_generator, derive_rng, split_key


def draw_trial(index, rng):
    return (index, int(rng.integers(0, 10 ** 9)))


class TestSeeding:
    """乱数ストリームの導出"""

    def test_derive_rng_is_deterministic(self):
        """同じ (seed, path) からは同じストリーム"""
        assert derive_rng(3, 1, 2).random() == derive_rng(3, 1, 2).random()

    def test_derive_rng_paths_differ(self):
        """異なる path からは異なるストリーム"""
        assert derive_rng(3, 1).random() != derive_rng(3, 2).random()

    def test_as_generator(self):
        """int / Generator / None を受け付ける"""
        rng = np.random.default_rng(1)
        assert as_generator(rng) is rng
        assert as_generator(5).random() == np.random.default_rng(5).random()
        assert as_generator(None).random() == np.random.default_rng(0).random()

    def test_split_key_range(self):
        """基底キーは非負の63ビット整数"""
        key = split_key(np.random.default_rng(0))
        assert 0 <= key < 2 ** 63


class TestRunTrials:
    """run_trials のテスト"""

    def test_sequential_order(self):
        """結果は試行番号順"""
        results = run_trials(draw_trial, 5, seed=9)
        assert [index for index, _ in results] == [0, 1, 2, 3, 4]

    def test_independent_of_workers(self):
        """ワーカー数によらず同じ結果"""
        assert run_trials(draw_trial, 12, seed=9, workers=1) == run_trials(draw_trial, 12, seed=9, workers=3)

    def test_invalid_trials(self):
        """trials < 1 はエラー"""
        with pytest.raises(ValueError):
            run_trials(draw_trial, 0, seed=0)
