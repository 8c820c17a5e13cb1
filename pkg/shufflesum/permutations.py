"""
Permutations - [n] 上の順列

順列の合成・逆元・スワップ（Cayley）距離・辞書順列挙を提供する。
写像は1始まりで保持する: images[i-1] = π(i)。

機能:
- compose: (outer∘inner)(i) = outer(inner(i))
- invert: 逆順列
- swap_distance: Swap(π, π′) = n − cycles(π′^{-1}∘π)
- enumerate_permutations: 全 n! 個の辞書順列挙（上限あり）
"""

import itertools
import logging
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from attrs import field, frozen

from .errors import EnumerationCapError, InvalidParameterError, SizeMismatchError

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 8


def _as_images(values: Sequence[int]) -> Tuple[int, ...]:
    images = tuple(int(v) for v in values)
    if sorted(images) != list(range(1, len(images) + 1)):
        raise InvalidParameterError(f"not a permutation of [1..{len(images)}]: {images}")
    return images


@frozen
class Permutation:
    """[n] 上の全単射（1始まり）"""
    images: Tuple[int, ...] = field(converter=_as_images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(1, n + 1))

    @classmethod
    def from_zero_based(cls, array: Sequence[int]) -> "Permutation":
        """0始まりの像配列（numpy配列可）から生成"""
        return cls([int(v) + 1 for v in array])

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __len__(self) -> int:
        return len(self.images)

    def zero_based(self) -> np.ndarray:
        """0始まりの像配列"""
        return np.asarray(self.images, dtype=np.int64) - 1

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.images, start=1))

    def cycle_count(self) -> int:
        return count_cycles(self.images)


def count_cycles(images: Sequence[int], one_based: bool = True) -> int:
    """像配列の巡回置換の個数"""
    offset = 1 if one_based else 0
    n = len(images)
    seen = [False] * n
    cycles = 0
    for start in range(n):
        if seen[start]:
            continue
        cycles += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = images[j] - offset
    return cycles


def _check_same_size(a: Permutation, b: Permutation) -> None:
    if a.n != b.n:
        raise SizeMismatchError(a.n, b.n, "permutation size")


def compose(outer: Permutation, inner: Permutation) -> Permutation:
    """
    合成 outer∘inner

    Args:
        outer: 後に適用する順列
        inner: 先に適用する順列

    Returns:
        result(i) = outer(inner(i))

    Raises:
        SizeMismatchError: サイズが異なる場合
    """
    _check_same_size(outer, inner)
    o = outer.images
    return Permutation([o[v - 1] for v in inner.images])


def invert(pi: Permutation) -> Permutation:
    """逆順列: invert(π)(π(i)) = i"""
    result = [0] * pi.n
    for i, v in enumerate(pi.images, start=1):
        result[v - 1] = i
    return Permutation(result)


def swap_distance(pi: Permutation, other: Permutation) -> int:
    """
    スワップ距離（Cayley距離）

    πをπ′に変える最小の互換の回数。n − cycles(π′^{-1}∘π) で計算する。

    Raises:
        SizeMismatchError: サイズが異なる場合
    """
    _check_same_size(pi, other)
    return pi.n - count_cycles(compose(invert(other), pi).images)


def distance_to_identity(images: Sequence[int], one_based: bool = True) -> int:
    """Swap(π, id) = n − cycles(π)"""
    return len(images) - count_cycles(images, one_based=one_based)


def enumerate_permutations(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Permutation]:
    """
    全順列を辞書順に列挙

    Args:
        n: サイズ
        cap: 列挙を許す最大のn

    Raises:
        EnumerationCapError: n > cap の場合
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if n > cap:
        raise EnumerationCapError(n, cap)
    for images in itertools.permutations(range(1, n + 1)):
        yield Permutation(images)


def all_permutations(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> List[Permutation]:
    """enumerate_permutations のリスト版"""
    return list(enumerate_permutations(n, cap))
