"""
protocol - split-and-mix による安全な総和と実数の総和推定
"""

from .planning import (
    PlanningReport,
    gamma_limit,
    planning_report,
    required_messages,
    security_parameter,
    sigma_from_dp,
)
from .real_summation import (
    SummationResult,
    VectorSummationResult,
    decode_sum,
    encode_real,
    reference_abs_error,
    run_real_summation,
    run_vector_summation,
)
from .split_and_mix import MessageMatrix, Transcript, aggregate, run_field_protocol, split, split_many

__all__ = [
    'MessageMatrix',
    'PlanningReport',
    'SummationResult',
    'Transcript',
    'VectorSummationResult',
    'aggregate',
    'decode_sum',
    'encode_real',
    'gamma_limit',
    'planning_report',
    'reference_abs_error',
    'required_messages',
    'run_field_protocol',
    'run_real_summation',
    'run_vector_summation',
    'security_parameter',
    'sigma_from_dp',
    'split',
    'split_many',
]
