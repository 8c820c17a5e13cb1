"""
FieldCore - 有限体（Z_q）のスカラーとベクトル

シェア・メッセージ・総和で使う Z_q の要素を扱う。プロトコルが使う演算は
加算だけなので、qは素数である必要はない。

機能:
- field_reduce_sum: 整数列の和を mod q で返す
- choose_modulus: 人数nに対する法 q = ⌈2·n^{3/2}⌉
- FieldModulus / FieldVec: 検証済みの法とベクトル
"""

import logging
import math
from typing import Iterable, List, Sequence, Tuple

from attrs import field, frozen

from .errors import InvalidParameterError

logger = logging.getLogger(__name__)

# sum of <= m*n terms below q must fit a 128-bit accumulator
MAX_MODULUS = 2 ** 96


def _check_modulus(q: int) -> int:
    if isinstance(q, FieldModulus):
        return q.q
    if isinstance(q, bool) or int(q) != q:
        raise InvalidParameterError(f"modulus must be an integer, got {q!r}")
    q = int(q)
    if q < 2:
        raise InvalidParameterError(f"modulus must be >= 2, got {q}")
    if q > MAX_MODULUS:
        raise InvalidParameterError(f"modulus {q} exceeds the supported bound 2^96")
    return q


@frozen
class FieldModulus:
    """Z_q の法"""
    q: int = field(converter=_check_modulus)

    def reduce(self, value: int) -> int:
        return int(value) % self.q

    def __int__(self) -> int:
        return self.q


def _as_q(q) -> int:
    return q.q if isinstance(q, FieldModulus) else _check_modulus(q)


def _as_modulus(q) -> "FieldModulus":
    return q if isinstance(q, FieldModulus) else FieldModulus(q)


def _int_tuple(values: Iterable[int]) -> Tuple[int, ...]:
    return tuple(int(v) for v in values)


@frozen
class FieldVec:
    """
    Z_q のベクトル

    すべての値は [0, q) に正規化済みであること（コンストラクタで検証）。
    """
    modulus: FieldModulus = field(converter=_as_modulus)
    values: Tuple[int, ...] = field(converter=_int_tuple)

    def __attrs_post_init__(self):
        q = self.modulus.q
        for v in self.values:
            if not 0 <= v < q:
                raise InvalidParameterError(f"field value {v} outside [0, {q})")

    @classmethod
    def from_ints(cls, values: Iterable[int], q) -> "FieldVec":
        """任意の整数列を mod q に正規化して生成"""
        modulus = q if isinstance(q, FieldModulus) else FieldModulus(q)
        return cls(modulus, [int(v) % modulus.q for v in values])

    @property
    def q(self) -> int:
        return self.modulus.q

    def __len__(self) -> int:
        return len(self.values)

    def total(self) -> int:
        return field_reduce_sum(self.values, self.modulus)


def field_reduce_sum(values: Sequence[int], q) -> int:
    """
    整数列の和を mod q で返す

    Args:
        values: 整数列（負の値も可）
        q: 法（int または FieldModulus）

    Returns:
        (Σ values) mod q ∈ [0, q)

    Raises:
        InvalidParameterError: q < 2 の場合
    """
    modulus = _as_q(q)
    # Python整数は任意精度なのでオーバーフローしない
    return sum(int(v) for v in values) % modulus


def choose_modulus(n: int) -> int:
    """
    人数nに対する法 q = ⌈2·n^{3/2}⌉ を整数演算で求める

    2·n^{3/2} = sqrt(4n^3) なので、q は 4n^3 の整数平方根の切り上げになる。

    Args:
        n: 人数（n >= 1）

    Returns:
        q

    Raises:
        InvalidParameterError: n < 1 の場合
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidParameterError(f"player count must be a positive integer, got {n!r}")
    n = int(n)
    target = 4 * n ** 3
    root = math.isqrt(target)
    return root if root * root == target else root + 1


def field_elements(values: Iterable[int], q) -> List[int]:
    """整数列を mod q で正規化したリスト"""
    modulus = _as_q(q)
    return [int(v) % modulus for v in values]
