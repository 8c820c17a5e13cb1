"""
コマンドハンドラー - CLIサブコマンドの実行

イベント（コマンド名・チェック名・実験設定・テストモード）を受け取り、
対応する計算を実行して RunReport を返す。例外は errorType つきの応答に変換する。

機能:
- params: σ・m・q・p の計画
- simulate: 実数総和推定の繰り返し実行と誤差の集計
- verify: 上界・補題の連鎖の検証（tvd-chain, worst-avg, disconnect, components, qpower,
  imperfectness, polya-dlap）
"""

import functools
import logging
import math
import time
from typing import Any, Callable, Dict, List, Optional

import attrs
import numpy as np

from ..analysis.bounds import q_power_expectation_bound, verify_component_bound
from ..analysis.exact import verify_collision_chain, verify_disconnect_bounds, verify_worst_average
from ..environment import ConfigurationProvider, experiment_logger
from ..errors import InvalidParameterError, PreconditionError
from ..noise import polya_dlap_equivalence_test
from ..parallel import run_trials
from ..protocol.planning import planning_report, required_messages, sigma_from_dp
from ..protocol.real_summation import SummationResult, reference_abs_error, run_real_summation, run_vector_summation
from ..seeding import derive_rng
from ..shufflers import ShufflerModel, composed_round_model, model_from_dict, verify_imperfectness
from .config import ConfigValidationError, ExperimentConfig, resolve_config
from .reports import RunReport

logger = logging.getLogger(__name__)

SERVICE_NAME = "shufflesum"

VERIFY_CHECKS = ("tvd-chain", "worst-avg", "disconnect", "components", "qpower", "imperfectness", "polya-dlap")

EXIT_PASSED = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_INTERNAL = 3


def handle_command(event: Dict[str, Any]) -> Dict[str, Any]:
    """
    CLIからのイベントを処理する

    Args:
        event: {"command": "params" | "simulate" | "verify", "check": チェック名（verifyのみ）,
                "config": 実験設定（未補完）, "testMode": bool}

    Returns:
        成功時 {"success": True, "report": RunReport},
        失敗時 {"success": False, "error": メッセージ, "errorType": 種別}
    """
    command = event.get("command")
    check = event.get("check")
    log = experiment_logger(logger, command, check)
    log.debug("Received command")

    try:
        config = resolve_config(command, event.get("config") or {}, check)
        log = experiment_logger(logger, command, check, config.seed)
        provider = ConfigurationProvider(SERVICE_NAME, config.values)
        started = time.perf_counter()

        if command == "params":
            report = cmd_params(config)
        elif command == "simulate":
            report = cmd_simulate(config, provider, bool(event.get("testMode", False)))
        elif command == "verify":
            report = cmd_verify(config, provider)
        else:
            raise ConfigValidationError(f"Unknown command: {command}")

        if config.get("record_timing"):
            report = attrs.evolve(report, timing=time.perf_counter() - started)
        log.info(f"Command completed: passed={report.passed}")
        return {"success": True, "report": report}

    except PreconditionError as e:
        log.warning(f"Precondition error: {e}")
        return {
            "success": False,
            "error": str(e),
            "errorType": "PreconditionError",
            "inequality": e.inequality,
        }
    except ValueError as e:
        error_msg = f"Validation error: {str(e)}"
        log.warning(error_msg)
        return {
            "success": False,
            "error": error_msg,
            "errorType": "ValidationError",
        }
    except Exception as e:
        log.exception(f"Unexpected error: {str(e)}")
        return {
            "success": False,
            "error": f"Unexpected error: {str(e)}",
            "errorType": "InternalError",
        }


def exit_code_for(response: Dict[str, Any]) -> int:
    """0: すべて成立, 1: 検証失敗, 2: 設定・前提条件の誤り, 3: 内部エラー"""
    if response.get("success"):
        return EXIT_PASSED if response["report"].passed else EXIT_CHECK_FAILED
    if response.get("errorType") in ("ValidationError", "PreconditionError"):
        return EXIT_INVALID
    return EXIT_INTERNAL


def _report(config: ExperimentConfig, results: Dict[str, Any], passed: bool,
            csv_rows: Optional[List[Dict[str, Any]]] = None) -> RunReport:
    return RunReport(
        command=config.command,
        check=config.check,
        config=config.values,
        results=results,
        passed=passed,
        csv_rows=csv_rows or [],
    )


# ========================================
# params
# ========================================

def cmd_params(config: ExperimentConfig) -> RunReport:
    """σ = sigma_from_dp(ε, δ), m = required_messages(n, γ, σ), q, p を計画する"""
    plan = planning_report(config["n"], float(config["epsilon"]), float(config["delta"]), float(config["gamma"]))
    results = plan.to_dict()
    results["guaranteed_security"] = plan.security > 0.0
    return _report(config, results, passed=True)


# ========================================
# simulate
# ========================================

def _simulate_trial(index: int, rng: np.random.Generator, inputs: List[Any], epsilon: float, delta: float,
                    model: ShufflerModel, m: int, d: int, add_noise: bool, cap: int) -> List[SummationResult]:
    if d == 1:
        return [run_real_summation(inputs, epsilon, model, m, rng, add_noise, cap)]
    result = run_vector_summation(inputs, epsilon, delta, model, rng, m=m, add_noise=add_noise, cap=cap)
    return list(result.coordinates)


def _simulation_inputs(config: ExperimentConfig) -> List[Any]:
    n, d = config["n"], config["d"]
    if "inputs" in config.values:
        inputs = config["inputs"]
        if len(inputs) != n:
            raise InvalidParameterError(f"inputs must have n={n} rows, got {len(inputs)}")
        if d > 1 and any(not isinstance(row, list) or len(row) != d for row in inputs):
            raise InvalidParameterError(f"inputs must be an n x d matrix with d={d}")
        return inputs
    value = float(config["value"])
    return [value] * n if d == 1 else [[value] * d for _ in range(n)]


def cmd_simulate(config: ExperimentConfig, provider: ConfigurationProvider, test_mode: bool = False) -> RunReport:
    """
    run_real_summation（d > 1 では run_vector_summation）を trials 回実行し、絶対誤差を集計する

    Raises:
        ConfigValidationError: disable_noise がテストモード以外で指定された場合
    """
    if config["disable_noise"] and not test_mode:
        raise ConfigValidationError("disable_noise is only allowed together with --test-mode")
    n, d, trials = config["n"], config["d"], config["trials"]
    if n < 1 or d < 1 or trials < 1:
        raise InvalidParameterError(f"n, d and trials must be >= 1, got n={n}, d={d}, trials={trials}")
    epsilon = float(config["epsilon"])
    if not epsilon > 0.0:
        raise InvalidParameterError(f"epsilon must be > 0, got {epsilon}")
    delta = float(config["delta"])
    epsilon_coordinate = epsilon / d

    m = config.get("m")
    if m is None:
        m = required_messages(n, float(config["gamma"]), sigma_from_dp(epsilon_coordinate, delta / d))
        logger.info(f"Planned m={m} messages per player")

    inputs = _simulation_inputs(config)
    model = model_from_dict(config["model"], n)
    trial = functools.partial(
        _simulate_trial,
        inputs=inputs,
        epsilon=epsilon,
        delta=delta,
        model=model,
        m=m,
        d=d,
        add_noise=not config["disable_noise"],
        cap=provider.get_enumeration_cap(),
    )
    outcomes = run_trials(trial, trials, config.seed, provider.get_worker_count())

    rows = [
        {"trial": t, "coordinate": k, "estimate": r.estimate, "true_sum": r.true_sum, "abs_error": r.abs_error}
        for t, coordinates in enumerate(outcomes)
        for k, r in enumerate(coordinates)
    ]
    errors = np.array([row["abs_error"] for row in rows])
    reference = reference_abs_error(epsilon_coordinate, n)
    mean_error = float(errors.mean())
    results = {
        "trials": trials,
        "n": n,
        "d": d,
        "m": m,
        "q": outcomes[0][0].q,
        "p": math.sqrt(n),
        "epsilon_per_coordinate": epsilon_coordinate,
        "mean_abs_error": mean_error,
        "median_abs_error": float(np.median(errors)),
        "reference_abs_error": reference,
        "error_to_reference_ratio": mean_error / reference,
        "central_laplace_reference": 1.0 / epsilon_coordinate,
    }
    if d > 1:
        results["mean_abs_error_per_coordinate"] = [
            float(np.mean([row["abs_error"] for row in rows if row["coordinate"] == k])) for k in range(d)
        ]
    return _report(config, results, passed=True, csv_rows=rows)


# ========================================
# verify
# ========================================

def _model(config: ExperimentConfig):
    return model_from_dict(config["model"], config["n"])


def _verify_tvd_chain(config: ExperimentConfig, provider: ConfigurationProvider) -> RunReport:
    report = verify_collision_chain(
        config["n"], config["m"], config["q"], _model(config), provider.get_exact_cap(), provider.get_enumeration_cap(),
    )
    return _report(config, report.to_dict(), report.passed)


def _verify_worst_average(config: ExperimentConfig, provider: ConfigurationProvider) -> RunReport:
    report = verify_worst_average(
        config["n"], config["m"], config["q"], _model(config), provider.get_exact_cap(), provider.get_enumeration_cap(),
    )
    return _report(config, report.to_dict(), report.passed)


def _verify_disconnect(config: ExperimentConfig, provider: ConfigurationProvider) -> RunReport:
    check = verify_disconnect_bounds(
        _model(config), config["m"], float(config["gamma"]), config["mode"], config["trials"], config.seed,
        provider.get_enumeration_cap(),
    )
    results = {
        "subsets": len(check.rows),
        "failures": [row.subset for row in check.failures()],
        "max_probability_to_bound": max((row.probability / row.bound for row in check.rows), default=0.0),
    }
    return _report(config, results, check.passed, check.to_rows())


def _verify_components(config: ExperimentConfig, provider: ConfigurationProvider) -> RunReport:
    check = verify_component_bound(
        _model(config), config["n"], config["m"], float(config["gamma"]), config["trials"], config.seed,
        provider.get_worker_count(), config["composed"], provider.get_enumeration_cap(),
    )
    results = {
        "trials": config["trials"],
        "probability_connected": check.histogram.probability(1),
        "failures": [row.c for row in check.rows if not row.holds],
    }
    return _report(config, results, check.passed, check.to_rows())


def _verify_qpower(config: ExperimentConfig, provider: ConfigurationProvider) -> RunReport:
    report = q_power_expectation_bound(
        config["n"], config["m"], config["q"], float(config["gamma"]), _model(config), config["trials"],
        config.seed, provider.get_worker_count(), config["composed"], provider.get_enumeration_cap(),
    )
    return _report(config, report.to_dict(), not report.exceeded())


def _verify_imperfectness(config: ExperimentConfig, provider: ConfigurationProvider) -> RunReport:
    gamma = float(config["gamma"])
    cap = provider.get_enumeration_cap()
    models = {"model": _model(config)}
    if config["composed"]:
        models["composed"] = composed_round_model(models["model"], models["model"])
    results: Dict[str, Any] = {}
    passed = True
    for index, (name, model) in enumerate(models.items()):
        report = verify_imperfectness(model, config["mode"], config["samples"], derive_rng(config.seed, index), cap)
        results[name] = {
            "max_log_ratio_per_swap": report.max_log_ratio_per_swap,
            "witness": report.witness,
            "estimate": report.estimate,
            "passes": report.passes(gamma),
        }
        passed = passed and report.passes(gamma)
    return _report(config, results, passed)


def _verify_polya_dlap(config: ExperimentConfig, provider: ConfigurationProvider) -> RunReport:
    report = polya_dlap_equivalence_test(
        config["n"], float(config["alpha"]), config["trials"], derive_rng(config.seed, 0),
        provider.get_significance(), config.get("null_alpha"),
    )
    return _report(config, {"statistic": report.statistic, "p_value": report.p_value, "bins": report.bins,
                            "significance": report.significance}, report.passed)


VERIFIERS: Dict[str, Callable[[ExperimentConfig, ConfigurationProvider], RunReport]] = {
    "tvd-chain": _verify_tvd_chain,
    "worst-avg": _verify_worst_average,
    "disconnect": _verify_disconnect,
    "components": _verify_components,
    "qpower": _verify_qpower,
    "imperfectness": _verify_imperfectness,
    "polya-dlap": _verify_polya_dlap,
}


def cmd_verify(config: ExperimentConfig, provider: ConfigurationProvider) -> RunReport:
    """名前付きの検証を実行する（レポートの passed はすべての不等式が成り立つときTrue）"""
    if config.check not in VERIFIERS:
        raise ConfigValidationError(f"Unknown check: {config.check}")
    return VERIFIERS[config.check](config, provider)
