"""
小規模インスタンスの厳密計算

split-and-mix の出力（アナリストが見る n×m 行列）の分布を厳密に求め、
同じ総和をもつ入力対の全変動距離（TVD）、衝突確率、合成シャッフラーでの
E[q^{C(G)−mn}] を計算して、上界の連鎖を数値的に確認する。

出力行列の添字: ラウンド順に列を並べ、列 (v_1..v_n) を q 進数
Σ v_i·q^{n−i} とみなした値を上位から連結したもの。
"""

import itertools
import logging
import math
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from attrs import asdict, frozen

from ..errors import EnumerationCapError, InvalidParameterError, SizeMismatchError
from ..fieldcore import FieldVec
from ..permutations import DEFAULT_ENUMERATION_CAP, Permutation, invert
from ..seeding import derive_rng
from ..shufflers import ShufflerModel, composed_round_model, model_size, pmf_table, sample_parallel_images
from .bounds import COMPARISON_TOLERANCE, disconnect_bound
from .graphs import UnionFind

logger = logging.getLogger(__name__)

DEFAULT_EXACT_CAP = 10 ** 6


def _check_exact_size(n: int, m: int, q: int, exact_cap: int) -> None:
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m}")
    size = q ** (m * n)
    if size > exact_cap:
        raise EnumerationCapError(size, exact_cap, "q^(mn)")


def _column_digits(n: int, q: int) -> np.ndarray:
    """全 q^n 列の各成分（行が列の添字に対応）"""
    return np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64).reshape(q ** n, n)


def _column_index(digits: np.ndarray, q: int) -> np.ndarray:
    n = digits.shape[-1]
    weights = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return digits @ weights


def _round_support(model: ShufflerModel, cap: int) -> List[Tuple[Permutation, float]]:
    return [(pi, w) for pi, w in pmf_table(model, cap).items() if w > 0.0]


def _permutation_maps(support: List[Tuple[Permutation, float]], digits: np.ndarray,
                      q: int) -> List[Tuple[np.ndarray, float]]:
    # 出力 o[π(i)] = c[i] なので o = c[π^{-1}]
    maps = []
    for pi, w in support:
        inverse = invert(pi).zero_based()
        maps.append((_column_index(digits[:, inverse], q), w))
    return maps


def exact_protocol_distribution(x: FieldVec, m: int, model: ShufflerModel,
                                exact_cap: int = DEFAULT_EXACT_CAP,
                                cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """
    入力 x に対する出力行列の厳密分布（長さ q^{mn} の確率ベクトル）

    先頭 m−1 ラウンドのシェア列は一様, 最終ラウンドは残差で決まることを使い、
    (出力の接頭辞, 残差) の同時分布をラウンドごとに更新する。

    Raises:
        EnumerationCapError: q^{mn} が exact_cap を超える場合
        UnsupportedModelError: モデルに厳密pmfがない場合
    """
    n, q = len(x), x.q
    size = model_size(model)
    if size != n:
        raise SizeMismatchError(n, size, "shuffler size")
    _check_exact_size(n, m, q, exact_cap)

    digits = _column_digits(n, q)
    columns = q ** n
    maps = _permutation_maps(_round_support(model, cap), digits, q)
    shift = _column_index((digits[:, None, :] + digits[None, :, :]) % q, q)  # shift[r, c] = index(r + c)

    # table[a, r]: 出力の接頭辞 a と残差 r の同時確率
    table = np.zeros((1, columns))
    table[0, int(_column_index(np.asarray(x.values, dtype=np.int64), q))] = 1.0
    for _ in range(m - 1):
        prefixes = table.shape[0]
        updated = np.zeros((prefixes, columns, columns))
        for c in range(columns):
            moved = table[:, shift[:, c]] / columns
            for index_map, w in maps:
                updated[:, index_map[c], :] += w * moved
        table = updated.reshape(prefixes * columns, columns)

    result = np.zeros((table.shape[0], columns))
    for index_map, w in maps:
        result[:, index_map] += w * table
    return result.ravel()


def decode_view(index: int, n: int, m: int, q: int) -> List[List[int]]:
    """出力添字を n×m 行列（行がスロット, 列がラウンド）に戻す"""
    flat = [int(d) for d in np.unravel_index(int(index), (q,) * (m * n))]
    return [[flat[j * n + i] for j in range(m)] for i in range(n)]


def view_index(rows: Sequence[Sequence[int]], q: int) -> int:
    """n×m 行列から出力添字を求める（decode_view の逆）"""
    n, m = len(rows), len(rows[0])
    flat = [int(rows[i][j]) for j in range(m) for i in range(n)]
    return int(np.ravel_multi_index(flat, (q,) * (m * n)))


def total_variation(p: np.ndarray, p_prime: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - p_prime).sum())


def exact_tvd_pair(x: FieldVec, x_prime: FieldVec, m: int, model: ShufflerModel,
                   exact_cap: int = DEFAULT_EXACT_CAP, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """2つの入力の出力分布間の TVD"""
    if len(x) != len(x_prime) or x.q != x_prime.q:
        raise SizeMismatchError(len(x), len(x_prime), "input")
    return total_variation(exact_protocol_distribution(x, m, model, exact_cap, cap),
                           exact_protocol_distribution(x_prime, m, model, exact_cap, cap))


def _all_inputs(n: int, q: int) -> List[FieldVec]:
    return [FieldVec(q, values) for values in itertools.product(range(q), repeat=n)]


def _all_distributions(n: int, m: int, q: int, model: ShufflerModel,
                       exact_cap: int, cap: int) -> Dict[Tuple[int, ...], np.ndarray]:
    _check_exact_size(n, m, q, exact_cap)
    return {x.values: exact_protocol_distribution(x, m, model, exact_cap, cap) for x in _all_inputs(n, q)}


@frozen
class SameSumTVD:
    worst: float
    average: float
    worst_pair: Tuple[Tuple[int, ...], Tuple[int, ...]]
    pairs: int


def _same_sum_groups(keys: Iterable[Tuple[int, ...]], q: int) -> Dict[int, List[Tuple[int, ...]]]:
    groups: Dict[int, List[Tuple[int, ...]]] = {}
    for key in keys:
        groups.setdefault(sum(key) % q, []).append(key)
    return groups


def _same_sum_tvd(laws: Dict[Tuple[int, ...], np.ndarray], q: int) -> SameSumTVD:
    worst, worst_pair, total, pairs = -1.0, None, 0.0, 0
    for members in _same_sum_groups(laws, q).values():
        for a in members:
            for b in members:
                tvd = total_variation(laws[a], laws[b])
                total += tvd
                pairs += 1
                if tvd > worst:
                    worst, worst_pair = tvd, (a, b)
    return SameSumTVD(worst=worst, average=total / pairs, worst_pair=worst_pair, pairs=pairs)


def exact_tvd_same_sum(n: int, m: int, q: int, model: ShufflerModel,
                       exact_cap: int = DEFAULT_EXACT_CAP, cap: int = DEFAULT_ENUMERATION_CAP) -> SameSumTVD:
    """
    同じ総和をもつすべての順序対 (x, x′)（x = x′ を含む）の TVD の最大値と平均

    総和ごとの入力数はすべて q^{n−1} なので、平均は一様ランダムな同総和対での期待値に等しい。
    """
    return _same_sum_tvd(_all_distributions(n, m, q, model, exact_cap, cap), q)


def exact_collision_prob(x: FieldVec, m: int, q: int, model: ShufflerModel,
                         exact_cap: int = DEFAULT_EXACT_CAP, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """独立な2回の実行の出力が一致する確率 Σ_v P[P(x)=v]²"""
    if x.q != int(q):
        raise InvalidParameterError(f"input modulus {x.q} differs from q={q}")
    law = exact_protocol_distribution(x, m, model, exact_cap, cap)
    return float(np.dot(law, law))


def _components(rounds: Sequence[Permutation], n: int) -> int:
    uf = UnionFind(n)
    for pi in rounds:
        for i, target in enumerate(pi.images):
            if target - 1 != i:
                uf.union(i, target - 1)
    return uf.num_components


def exact_composed_q_power(n: int, m: int, q: int, model: ShufflerModel,
                           exact_cap: int = DEFAULT_EXACT_CAP,
                           cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """
    合成シャッフラー 𝒮^{-1}∘𝒮′ の m ラウンドについての E[q^{C(G)−mn}]

    Raises:
        EnumerationCapError: 台の大きさの m 乗が exact_cap を超える場合
    """
    support = _round_support(composed_round_model(model, model), cap)
    tuples = len(support) ** m
    if tuples > exact_cap:
        raise EnumerationCapError(tuples, exact_cap, "composed support^m")
    expectation = 0.0
    for combo in itertools.product(support, repeat=m):
        weight = math.prod(w for _, w in combo)
        c = _components([pi for pi, _ in combo], n)
        expectation += weight * float(q) ** (c - m * n)
    return expectation


@frozen
class CollisionChainReport:
    """平均TVD ≤ √(q^{mn−1}·平均衝突確率 − 1) と 平均衝突確率 ≤ E[q^{C(G)−mn}] の確認"""
    n: int
    m: int
    q: int
    average_tvd: float
    worst_tvd: float
    average_collision: float
    tvd_bound: float
    q_power: float
    tvd_holds: bool
    collision_holds: bool

    @property
    def passed(self) -> bool:
        return self.tvd_holds and self.collision_holds

    def to_dict(self) -> Dict[str, Any]:
        result = asdict(self)
        result["passed"] = self.passed
        return result


def verify_collision_chain(n: int, m: int, q: int, model: ShufflerModel,
                           exact_cap: int = DEFAULT_EXACT_CAP,
                           cap: int = DEFAULT_ENUMERATION_CAP,
                           tolerance: float = COMPARISON_TOLERANCE) -> CollisionChainReport:
    """一様ランダムな入力での上界の連鎖を厳密に確認する"""
    laws = _all_distributions(n, m, q, model, exact_cap, cap)
    tvd = _same_sum_tvd(laws, q)
    average_collision = float(np.mean([np.dot(law, law) for law in laws.values()]))
    tvd_bound = math.sqrt(max(0.0, float(q) ** (m * n - 1) * average_collision - 1.0))
    q_power = exact_composed_q_power(n, m, q, model, exact_cap, cap)
    report = CollisionChainReport(
        n=n, m=m, q=q,
        average_tvd=tvd.average,
        worst_tvd=tvd.worst,
        average_collision=average_collision,
        tvd_bound=tvd_bound,
        q_power=q_power,
        tvd_holds=tvd.average <= tvd_bound + tolerance,
        collision_holds=average_collision <= q_power + tolerance,
    )
    logger.info(f"Collision chain (n={n}, m={m}, q={q}): passed={report.passed}")
    return report


@frozen
class WorstAverageReport:
    """
    各同総和対で TVD_{m+1}(x, x′) ≤ E_X[TVD_m(X, X − (x − x′))] を確認した結果

    pooled_average_m は一様ランダムな同総和対での m メッセージの平均TVD（参考値）。
    """
    n: int
    m: int
    q: int
    worst_next: float
    pooled_average_m: float
    max_violation: float
    violating_pair: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def verify_worst_average(n: int, m: int, q: int, model: ShufflerModel,
                         exact_cap: int = DEFAULT_EXACT_CAP,
                         cap: int = DEFAULT_ENUMERATION_CAP,
                         tolerance: float = COMPARISON_TOLERANCE) -> WorstAverageReport:
    """
    m+1 メッセージでの最悪TVDが m メッセージでの平均TVDで抑えられることを対ごとに確認する
    """
    laws_m = _all_distributions(n, m, q, model, exact_cap, cap)
    laws_next = _all_distributions(n, m + 1, q, model, exact_cap, cap)
    keys = list(laws_m)

    # difference -> E_X[TVD_m(X, X − difference)]
    shifted_average: Dict[Tuple[int, ...], float] = {}
    for difference in itertools.product(range(q), repeat=n):
        if sum(difference) % q:
            continue
        shifted_average[difference] = float(np.mean([
            total_variation(laws_m[x], laws_m[tuple((a - d) % q for a, d in zip(x, difference))])
            for x in keys
        ]))

    worst_next, max_violation, violating_pair = 0.0, -math.inf, None
    for members in _same_sum_groups(laws_next, q).values():
        for a in members:
            for b in members:
                lhs = total_variation(laws_next[a], laws_next[b])
                worst_next = max(worst_next, lhs)
                excess = lhs - shifted_average[tuple((u - v) % q for u, v in zip(a, b))]
                if excess > max_violation:
                    max_violation, violating_pair = excess, (a, b)

    pooled = _same_sum_tvd(laws_m, q).average
    report = WorstAverageReport(
        n=n, m=m, q=q,
        worst_next=worst_next,
        pooled_average_m=pooled,
        max_violation=max_violation,
        violating_pair=violating_pair if max_violation > tolerance else None,
        passed=max_violation <= tolerance,
    )
    logger.info(f"Worst/average reduction (n={n}, m={m}, q={q}): passed={report.passed}")
    return report


def _as_subset(subset: Iterable[int], n: int) -> FrozenSet[int]:
    members = frozenset(int(v) for v in subset)
    for v in members:
        if not 1 <= v <= n:
            raise InvalidParameterError(f"subset member {v} outside [1, {n}]")
    return members


def _preserves(images: Sequence[int], members: FrozenSet[int], one_based: bool = True) -> bool:
    offset = 0 if one_based else 1
    return all(((images[i - 1] + offset) in members) == (i in members) for i in range(1, len(images) + 1))


def empirical_disconnect_prob(model: ShufflerModel, subset: Iterable[int], m: int, mode: str = "exact",
                              trials: int = 10_000, seed: int = 0,
                              cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """
    m ラウンドの通信グラフに S と補集合をまたぐ辺がない確率

    辺がないことは、すべてのラウンドで π_j(S) = S であることと同値。

    Args:
        model: ラウンドごとのシャッフラーモデル
        subset: S（1始まり）
        m: ラウンド数
        mode: "exact"（pmfの積分, 結果は (Σ_{π(S)=S} pmf(π))^m）または "monte_carlo"
        trials: monte_carlo の試行回数
        seed: monte_carlo の基底seed

    Raises:
        UnsupportedModelError: exact で厳密pmfがないモデルの場合
    """
    n = model_size(model)
    members = _as_subset(subset, n)
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m}")
    if mode == "exact":
        per_round = sum(w for pi, w in pmf_table(model, cap).items() if _preserves(pi.images, members))
        return per_round ** m
    elif mode == "monte_carlo":
        if trials < 1:
            raise InvalidParameterError(f"trials must be >= 1, got {trials}")
        hits = 0
        for t in range(trials):
            rounds = sample_parallel_images(model, m, derive_rng(seed, t), cap)
            hits += all(_preserves(images.tolist(), members, one_based=False) for images in rounds)
        return hits / trials
    raise InvalidParameterError(f"unknown mode: {mode}")


@frozen
class DisconnectRow:
    subset: Tuple[int, ...]
    probability: float
    half_width: float
    bound: float
    holds: bool


@frozen
class DisconnectCheck:
    """すべての非自明な部分集合 S についての確認結果"""
    n: int
    m: int
    gamma: float
    mode: str
    rows: Tuple[DisconnectRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.holds for row in self.rows)

    def failures(self) -> List[DisconnectRow]:
        return [row for row in self.rows if not row.holds]

    def to_rows(self) -> List[Dict[str, Any]]:
        return [
            {"subset": " ".join(str(v) for v in row.subset), "probability": row.probability,
             "half_width": row.half_width, "bound": row.bound, "holds": row.holds}
            for row in self.rows
        ]


def verify_disconnect_bounds(model: ShufflerModel, m: int, gamma: float, mode: str = "exact",
                             trials: int = 10_000, seed: int = 0,
                             cap: int = DEFAULT_ENUMERATION_CAP) -> DisconnectCheck:
    """
    すべての S（1 ≤ |S| ≤ n−1）で 辺なし確率 ≤ disconnect_bound(n, |S|, m, γ) を確認する

    monte_carlo では推定値 − 3σ半幅 と上界を比較する。
    """
    n = model_size(model)
    rows = []
    for size in range(1, n):
        bound = disconnect_bound(n, size, m, gamma).bound
        for subset in itertools.combinations(range(1, n + 1), size):
            probability = empirical_disconnect_prob(model, subset, m, mode, trials, seed, cap)
            half_width = 0.0
            if mode == "monte_carlo":
                half_width = 3.0 * math.sqrt(probability * (1.0 - probability) / trials)
            rows.append(DisconnectRow(
                subset=subset,
                probability=probability,
                half_width=half_width,
                bound=bound,
                holds=probability - half_width <= bound + COMPARISON_TOLERANCE,
            ))
    check = DisconnectCheck(n=n, m=m, gamma=gamma, mode=mode, rows=tuple(rows))
    logger.info(f"Disconnect bounds (n={n}, m={m}, gamma={gamma}, {mode}): passed={check.passed}")
    return check
