"""
通信グラフ

プレイヤー i がラウンド j のメッセージをスロット π_j(i) に渡すとき、
辺 {i, π_j(i)} を張ったグラフ G の連結成分数 C(G) を数える。
"""

import logging
from typing import FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np
from attrs import field, frozen

from ..errors import InvalidParameterError
from ..shufflers import RoundPermutations

logger = logging.getLogger(__name__)

Edge = FrozenSet[int]


def _edge_set(edges: Iterable[Iterable[int]]) -> FrozenSet[Edge]:
    return frozenset(frozenset(int(v) for v in e) for e in edges)


@frozen
class CommGraph:
    """無向グラフ（頂点は1始まり, 自己ループなし）"""
    n: int
    edges: FrozenSet[Edge] = field(converter=_edge_set)

    def __attrs_post_init__(self):
        for edge in self.edges:
            if len(edge) != 2:
                raise InvalidParameterError(f"edges must join two distinct players, got {sorted(edge)}")
            for v in edge:
                if not 1 <= v <= self.n:
                    raise InvalidParameterError(f"vertex {v} outside [1, {self.n}]")

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(tuple(sorted(e)) for e in self.edges)


class UnionFind:
    """経路圧縮つき Union-Find（0始まり）"""

    def __init__(self, size: int):
        self.parents = list(range(size))
        self.num_components = size

    def find(self, elem: int) -> int:
        root = elem
        while root != self.parents[root]:
            root = self.parents[root]
        while elem != root:
            self.parents[elem], elem = root, self.parents[elem]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        self.parents[rb] = ra
        self.num_components -= 1


def build_comm_graph(rounds: RoundPermutations) -> CommGraph:
    """各ラウンド j・各プレイヤー i について π_j(i) ≠ i なら辺 {i, π_j(i)} を張る"""
    edges = set()
    for pi in rounds:
        for i, target in enumerate(pi.images, start=1):
            if target != i:
                edges.add(frozenset((i, target)))
    return CommGraph(rounds.n, edges)


def count_components(graph: CommGraph) -> int:
    """C(G)（孤立点も1成分と数える）"""
    uf = UnionFind(graph.n)
    for edge in graph.edges:
        a, b = tuple(edge)
        uf.union(a - 1, b - 1)
    return uf.num_components


def count_components_from_images(round_images: Sequence[np.ndarray], n: int) -> int:
    """0始まりの像配列から直接 C(G) を数える（グラフを作らない高速版）"""
    uf = UnionFind(n)
    for images in round_images:
        for i, target in enumerate(np.asarray(images).tolist()):
            if target != i:
                uf.union(i, target)
    return uf.num_components
