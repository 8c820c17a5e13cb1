"""
乱数ストリームの導出

(seed, ラウンド番号), (seed, 試行番号) のようなカウンタ列から独立な
numpy Generator を導出する。同じ列からは常に同じストリームが得られる。
"""

from typing import Union

import numpy as np

RngLike = Union[int, np.random.Generator, None]


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """seedとカウンタ列から独立なGeneratorを生成"""
    return np.random.default_rng([int(seed), *(int(p) for p in path)])


def as_generator(rng: RngLike) -> np.random.Generator:
    """整数seed・Generator・Noneのいずれかを受け取りGeneratorを返す"""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng(0)
    return np.random.default_rng(int(rng))


def split_key(rng: np.random.Generator) -> int:
    """呼び出し側のGeneratorから子ストリーム用の基底キーを1つ取り出す"""
    return int(rng.integers(0, 2 ** 63 - 1))
