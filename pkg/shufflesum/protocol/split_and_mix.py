"""
Split-and-Mix - 加法的シェア分割とm-並列シャッフル

各プレイヤーは入力 x_i を m 個のシェアに分割し（和が x_i mod q）、
ラウンド j のシェアは独立に引いた順列 π_j で並べ替えられる。
アナリストはシャッフル後の n×m 行列だけを見て、全メッセージの和を計算する。
"""

import logging
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from attrs import field, frozen

from ..errors import InvalidParameterError, SizeMismatchError
from ..fieldcore import FieldModulus, FieldVec, _as_modulus
from ..permutations import DEFAULT_ENUMERATION_CAP, Permutation
from ..shufflers import RoundPermutations, ShufflerModel, model_size, sample_parallel_images

logger = logging.getLogger(__name__)

INT64_LIMIT = 2 ** 63


def _check_rounds(m: int) -> int:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise InvalidParameterError(f"number of messages m must be >= 1, got {m!r}")
    return int(m)


def _dtype_for(q: int, m: int):
    # 行和の途中結果がint64に収まらない場合はPython整数で保持する
    return np.int64 if q * max(m, 1) < INT64_LIMIT else object


def uniform_field_elements(q: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """[0, q) 上の一様乱数をsize個"""
    if q < INT64_LIMIT:
        return rng.integers(0, q, size=size, dtype=np.int64)
    nbytes = (q.bit_length() + 7) // 8
    limit = (256 ** nbytes // q) * q
    out = np.empty(size, dtype=object)
    for index in range(size):
        while True:
            value = int.from_bytes(rng.bytes(nbytes), "little")
            if value < limit:
                out[index] = value % q
                break
    return out


def _read_only(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.setflags(write=False)
    return values


@frozen(eq=False)
class MessageMatrix:
    """n×m のメッセージ行列（行iはプレイヤーiのシェア, 列jはラウンドj）"""
    modulus: FieldModulus = field(converter=_as_modulus)
    values: np.ndarray = field(converter=_read_only)

    def __attrs_post_init__(self):
        if self.values.ndim != 2:
            raise InvalidParameterError(f"message matrix must be 2-dimensional, got shape {self.values.shape}")

    @property
    def q(self) -> int:
        return self.modulus.q

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def row_sums(self) -> List[int]:
        return [sum(int(v) for v in row) % self.q for row in self.values]

    def total(self) -> int:
        if self.values.dtype != object and self.q * max(self.values.size, 1) < INT64_LIMIT:
            return int(self.values.sum()) % self.q
        return sum(int(v) for v in self.values.ravel()) % self.q

    def to_rows(self) -> List[List[int]]:
        return [[int(v) for v in row] for row in self.values]


@frozen(eq=False)
class Transcript:
    """
    プロトコル実行の記録

    アナリストが見るのは shuffled だけ。入力と順列はデバッグ用。
    """
    shuffled: MessageMatrix
    round_images: Tuple[np.ndarray, ...] = field(converter=tuple, repr=False)
    pre_shuffle: MessageMatrix = field(repr=False)
    inputs: FieldVec = field(repr=False)

    @property
    def permutations(self) -> RoundPermutations:
        return RoundPermutations([Permutation.from_zero_based(a) for a in self.round_images])

    def analyst_view(self) -> List[List[int]]:
        return self.shuffled.to_rows()

    def to_csv_rows(self) -> List[Dict[str, Any]]:
        """列 round, slot, value（いずれも1始まり）の行リスト"""
        rows = []
        for j in range(self.shuffled.m):
            for i in range(self.shuffled.n):
                rows.append({"round": j + 1, "slot": i + 1, "value": int(self.shuffled.values[i, j])})
        return rows


def split(x: int, m: int, q, rng: np.random.Generator) -> List[int]:
    """
    x を和が x mod q になる m 個のシェアに分割

    先頭 m−1 個は [0,q) 上で独立一様、最後の1個で和を合わせる。

    Raises:
        InvalidParameterError: m < 1 または x ∉ [0, q) の場合
    """
    m = _check_rounds(m)
    modulus = _as_modulus(q)
    if not 0 <= int(x) < modulus.q:
        raise InvalidParameterError(f"field element {x} outside [0, {modulus.q})")
    shares = [int(v) for v in uniform_field_elements(modulus.q, m - 1, rng)]
    shares.append((int(x) - sum(shares)) % modulus.q)
    return shares


def split_many(inputs: FieldVec, m: int, rng: np.random.Generator) -> MessageMatrix:
    """全プレイヤーの入力を一度に分割した n×m 行列"""
    m = _check_rounds(m)
    q = inputs.q
    n = len(inputs)
    dtype = _dtype_for(q, m)
    values = np.empty((n, m), dtype=dtype)
    if m > 1:
        values[:, :-1] = uniform_field_elements(q, n * (m - 1), rng).reshape(n, m - 1)
    if dtype is np.int64:
        totals = values[:, :-1].sum(axis=1) if m > 1 else np.zeros(n, dtype=np.int64)
        values[:, -1] = (np.asarray(inputs.values, dtype=np.int64) - totals) % q
    else:
        for i, x in enumerate(inputs.values):
            values[i, -1] = (x - sum(int(v) for v in values[i, :-1])) % q
    return MessageMatrix(inputs.modulus, values)


def shuffle_columns(matrix: MessageMatrix, round_images: Sequence[np.ndarray]) -> MessageMatrix:
    """
    ラウンドjの列を π_j で並べ替える: out[π_j(i), j] = x[i, j]

    Raises:
        SizeMismatchError: 順列の数またはサイズが行列と合わない場合
    """
    if len(round_images) != matrix.m:
        raise SizeMismatchError(matrix.m, len(round_images), "round count")
    out = np.empty_like(matrix.values)
    for j, images in enumerate(round_images):
        images = np.asarray(images)
        if images.size != matrix.n:
            raise SizeMismatchError(matrix.n, images.size, "permutation size")
        out[images, j] = matrix.values[:, j]
    return MessageMatrix(matrix.modulus, out)


def run_field_protocol(inputs: FieldVec, m: int, model: ShufflerModel, rng: np.random.Generator,
                       cap: int = DEFAULT_ENUMERATION_CAP) -> Transcript:
    """
    split-and-mix を1回実行する

    Args:
        inputs: n人の入力（Z_q の要素）
        m: 1人あたりのメッセージ数
        model: [n] 上のシャッフラーモデル（ラウンドごとに独立に引く）
        rng: 乱数状態

    Returns:
        Transcript

    Raises:
        SizeMismatchError: モデルのサイズが n と異なる場合
    """
    m = _check_rounds(m)
    n = len(inputs)
    size = model_size(model)
    if size != n:
        raise SizeMismatchError(n, size, "shuffler size")
    pre = split_many(inputs, m, rng)
    images = sample_parallel_images(model, m, rng, cap)
    shuffled = shuffle_columns(pre, images)
    return Transcript(shuffled=shuffled, round_images=images, pre_shuffle=pre, inputs=inputs)


def aggregate(transcript: Transcript) -> int:
    """アナリストの出力: 全 mn メッセージの和 mod q"""
    return transcript.shuffled.total()
