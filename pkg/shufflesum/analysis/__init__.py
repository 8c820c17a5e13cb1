"""
analysis - 通信グラフ・確率上界・厳密検証・プライバシー増幅
"""

from .amplification import AmplificationResult, amplification_bound
from .bounds import BoundReport, component_bound, disconnect_bound, q_power_expectation_bound, verify_component_bound
from .estimators import ComponentHistogram, empirical_component_dist
from .exact import (
    empirical_disconnect_prob,
    exact_collision_prob,
    exact_composed_q_power,
    exact_protocol_distribution,
    exact_tvd_pair,
    exact_tvd_same_sum,
    verify_collision_chain,
    verify_disconnect_bounds,
    verify_worst_average,
)
from .graphs import CommGraph, build_comm_graph, count_components

__all__ = [
    'AmplificationResult',
    'BoundReport',
    'CommGraph',
    'ComponentHistogram',
    'amplification_bound',
    'build_comm_graph',
    'component_bound',
    'count_components',
    'disconnect_bound',
    'empirical_component_dist',
    'empirical_disconnect_prob',
    'exact_collision_prob',
    'exact_composed_q_power',
    'exact_protocol_distribution',
    'exact_tvd_pair',
    'exact_tvd_same_sum',
    'q_power_expectation_bound',
    'verify_collision_chain',
    'verify_component_bound',
    'verify_disconnect_bounds',
    'verify_worst_average',
]
