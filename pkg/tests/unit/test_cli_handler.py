"""
CLI（設定の解決・レポート・コマンドハンドラー）のユニットテスト
"""

import json
import math
from unittest.mock import patch

import numpy as np
import pytest

from shufflesum import __version__
from shufflesum.cli.config import (
    ConfigValidationError,
    load_schema,
    parse_overrides,
    read_config_file,
    resolve_config,
)
import shufflesum.cli.handler as handler_module
from shufflesum.cli.handler import (
    EXIT_CHECK_FAILED,
    EXIT_INTERNAL,
    EXIT_INVALID,
    EXIT_PASSED,
    VERIFY_CHECKS,
    exit_code_for,
    handle_command,
)
from shufflesum.cli.reports import RunReport, csv_path_for, csv_text, to_jsonable, write_report
from shufflesum.errors import InvalidParameterError
from shufflesum.permutations import Permutation


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("SHUFFLESUM_ENV", raising=False)
    monkeypatch.delenv("SHUFFLESUM_WORKERS", raising=False)


class TestResolveConfig:
    """resolve_config のテスト"""

    def test_defaults_are_filled(self):
        """省略したキーはスキーマのデフォルトで補完"""
        config = resolve_config("params", {"n": 1000, "epsilon": 1.0, "delta": 1e-6})
        assert config.command == "params"
        assert config.check is None
        assert config["gamma"] == 0.0
        assert config.seed == 0
        assert config.get("record_timing") is False
        assert "workers" not in config.values

    def test_verify_uses_check_schema(self):
        """verify ではチェックごとのスキーマを使う"""
        config = resolve_config("verify", {"n": 3, "q": 3}, "worst-avg")
        assert config["m"] == 1
        assert config["model"] == {"variant": "uniform"}

    def test_every_check_has_schema(self):
        """すべてのチェック名にスキーマがある"""
        for check in VERIFY_CHECKS:
            assert "properties" in load_schema("verify", check)

    def test_unknown_keys(self):
        """未知のキーは拒否"""
        with pytest.raises(ConfigValidationError) as excinfo:
            resolve_config("params", {"n": 1000, "epsilon": 1.0, "delta": 1e-6, "colour": "red"})
        assert "colour" in str(excinfo.value)

    def test_missing_keys(self):
        """必須キーの欠落は拒否"""
        with pytest.raises(ConfigValidationError) as excinfo:
            resolve_config("verify", {"n": 3}, "tvd-chain")
        assert "m, q" in str(excinfo.value)

    @pytest.mark.parametrize("key,value", [
        ("n", 3.5),
        ("n", True),
        ("epsilon", "one"),
        ("record_timing", 1),
    ])
    def test_wrong_type(self, key, value):
        """型が合わなければ拒否（boolは整数として扱わない）"""
        raw = {"n": 1000, "epsilon": 1.0, "delta": 1e-6, key: value}
        with pytest.raises(ConfigValidationError):
            resolve_config("params", raw)

    def test_integer_is_a_number(self):
        """number には整数も使える"""
        assert resolve_config("params", {"n": 1000, "epsilon": 1, "delta": 1e-6})["epsilon"] == 1

    def test_negative_seed(self):
        """seed < 0 は拒否"""
        with pytest.raises(ConfigValidationError):
            resolve_config("params", {"n": 1000, "epsilon": 1.0, "delta": 1e-6, "seed": -1})

    def test_unknown_command_and_check(self):
        """未知のコマンド・チェックは拒否"""
        with pytest.raises(ConfigValidationError):
            resolve_config("train", {})
        with pytest.raises(ConfigValidationError):
            resolve_config("verify", {}, "no-such-check")

    def test_validation_error_is_value_error(self):
        """設定エラーは InvalidParameterError の派生"""
        assert issubclass(ConfigValidationError, InvalidParameterError)
        assert issubclass(ConfigValidationError, ValueError)


class TestOverridesAndFiles:
    """--set と設定ファイルの読み込み"""

    def test_parse_overrides(self):
        """値はJSONとして解釈し、失敗すれば文字列"""
        overrides = parse_overrides([
            "n=19",
            "gamma=0.05",
            "model={\"variant\": \"point_mass\"}",
            "mode=monte_carlo",
            "record_timing=true",
            "label=a=b",
        ])
        assert overrides == {
            "n": 19,
            "gamma": 0.05,
            "model": {"variant": "point_mass"},
            "mode": "monte_carlo",
            "record_timing": True,
            "label": "a=b",
        }

    def test_override_without_equals(self):
        """key=value 形式でなければ拒否"""
        with pytest.raises(ConfigValidationError):
            parse_overrides(["n"])

    def test_read_config_file(self, tmp_path):
        """UTF-8のJSONオブジェクトを読む"""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"n": 19, "note": "検証"}, ensure_ascii=False), encoding="utf-8")
        assert read_config_file(str(path)) == {"n": 19, "note": "検証"}
        assert read_config_file(None) == {}

    def test_read_config_file_errors(self, tmp_path):
        """存在しない・JSONでない・オブジェクトでないファイルは拒否"""
        with pytest.raises(ConfigValidationError):
            read_config_file(str(tmp_path / "missing.json"))
        broken = tmp_path / "broken.json"
        broken.write_text("{n: 19", encoding="utf-8")
        with pytest.raises(ConfigValidationError):
            read_config_file(str(broken))
        listing = tmp_path / "list.json"
        listing.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigValidationError):
            read_config_file(str(listing))


class TestReports:
    """RunReport と書き出しのテスト"""

    def test_to_jsonable(self):
        """順列・numpy値・無限大・集合を変換"""
        value = {
            "perm": Permutation([2, 1, 3]),
            "count": np.int64(7),
            "ratio": np.float64(0.25),
            "bound": math.inf,
            "members": frozenset({3, 1}),
            "matrix": np.array([[1, 2], [3, 4]]),
            4: (1, 2),
        }
        assert to_jsonable(value) == {
            "perm": [2, 1, 3],
            "count": 7,
            "ratio": 0.25,
            "bound": "inf",
            "members": [1, 3],
            "matrix": [[1, 2], [3, 4]],
            "4": [1, 2],
        }

    def test_report_json_is_sorted(self):
        """キーは整列され、バージョンを含み、timing は指定時のみ"""
        report = RunReport(command="params", check=None, config={"n": 19, "a": 1}, results={"z": 1, "b": 2},
                           passed=True)
        text = report.to_json()
        data = json.loads(text)
        assert data["version"] == __version__
        assert "timing_seconds" not in data
        assert list(data) == sorted(data)
        assert list(data["results"]) == ["b", "z"]
        assert text == report.to_json()

    def test_csv_text(self):
        """浮動小数点は repr の全精度"""
        text = csv_text([{"trial": 0, "estimate": 0.1 + 0.2}, {"trial": 1, "estimate": np.float64(1.5)}])
        assert text == "trial,estimate\n0,0.30000000000000004\n1,1.5\n"
        assert csv_text([]) == ""

    def test_write_report(self, tmp_path):
        """--out のJSONと隣のCSVを書き出す"""
        out = tmp_path / "run.json"
        report = RunReport(command="simulate", check=None, config={}, results={}, passed=True,
                           csv_rows=[{"trial": 0, "abs_error": 0.0}])
        path = write_report(report, str(out))
        assert path == csv_path_for(str(out)) == tmp_path / "run.csv"
        assert json.loads(out.read_text(encoding="utf-8"))["command"] == "simulate"
        assert path.read_text(encoding="utf-8") == "trial,abs_error\n0,0.0\n"

    def test_write_report_stdout(self, capsys):
        """out がなければ標準出力"""
        report = RunReport(command="params", check=None, config={}, results={"m": 3}, passed=True)
        assert write_report(report, None) is None
        assert json.loads(capsys.readouterr().out)["results"] == {"m": 3}


class TestHandleCommand:
    """handle_command のテスト"""

    def test_params(self):
        """params は計画結果を返す"""
        response = handle_command({
            "command": "params",
            "config": {"n": 10 ** 6, "epsilon": 1.0, "delta": 2 ** -30},
        })
        assert response["success"] is True
        report = response["report"]
        assert report.passed is True
        assert report.results["sigma_target"] == 31
        assert report.results["q"] == 2 * 10 ** 9
        assert report.results["guaranteed_security"] is True
        assert exit_code_for(response) == EXIT_PASSED

    def test_precondition_error(self):
        """前提条件違反は破れた不等式を返す"""
        response = handle_command({
            "command": "params",
            "config": {"n": 18, "epsilon": 1.0, "delta": 1e-6},
        })
        assert response["success"] is False
        assert response["errorType"] == "PreconditionError"
        assert response["inequality"] == "n >= 19"
        assert exit_code_for(response) == EXIT_INVALID

    def test_validation_error(self):
        """設定エラーは ValidationError"""
        response = handle_command({"command": "params", "config": {"n": 1000}})
        assert response["success"] is False
        assert response["errorType"] == "ValidationError"
        assert "Missing required config keys" in response["error"]
        assert exit_code_for(response) == EXIT_INVALID

    def test_unknown_check(self):
        """未知のチェックは ValidationError"""
        response = handle_command({"command": "verify", "check": "no-such-check", "config": {}})
        assert response["errorType"] == "ValidationError"

    def test_disable_noise_requires_test_mode(self):
        """disable_noise はテストモード以外では拒否"""
        event = {
            "command": "simulate",
            "config": {"n": 100, "epsilon": 1.0, "m": 3, "trials": 2, "disable_noise": True},
        }
        assert handle_command(event)["errorType"] == "ValidationError"
        response = handle_command(dict(event, testMode=True))
        assert response["success"] is True
        assert response["report"].results["mean_abs_error"] == 0.0

    def test_internal_error(self):
        """予期しない例外は InternalError（終了コード3）"""
        with patch("shufflesum.cli.handler.cmd_params", side_effect=RuntimeError("boom")):
            response = handle_command({
                "command": "params",
                "config": {"n": 1000, "epsilon": 1.0, "delta": 1e-6},
            })
        assert response["errorType"] == "InternalError"
        assert "boom" in response["error"]
        assert exit_code_for(response) == EXIT_INTERNAL

    def test_failed_check(self):
        """恒等シャッフラーでは非連結確率の上界が破れる"""
        response = handle_command({
            "command": "verify",
            "check": "disconnect",
            "config": {"n": 4, "m": 1, "gamma": 0.2, "model": {"variant": "point_mass"}},
        })
        assert response["success"] is True
        assert response["report"].passed is False
        assert response["report"].results["subsets"] == 14
        assert exit_code_for(response) == EXIT_CHECK_FAILED

    def test_record_timing(self):
        """record_timing のときだけ実行時間を記録"""
        config = {"n": 3, "m": 1, "q": 3}
        plain = handle_command({"command": "verify", "check": "tvd-chain", "config": config})
        timed = handle_command({"command": "verify", "check": "tvd-chain",
                                "config": dict(config, record_timing=True)})
        assert plain["report"].timing is None
        assert timed["report"].timing >= 0.0
        assert "timing_seconds" in timed["report"].to_dict()

    def test_disconnect_single_player(self):
        """n=1 では部分集合がなく、検証は成立する"""
        response = handle_command({
            "command": "verify",
            "check": "disconnect",
            "config": {"n": 1, "m": 1, "gamma": 0.0},
        })
        assert response["success"] is True
        assert response["report"].results["subsets"] == 0
        assert response["report"].results["max_probability_to_bound"] == 0.0
        assert exit_code_for(response) == EXIT_PASSED

    @pytest.mark.parametrize("check", ["tvd-chain", "worst-avg"])
    def test_enumeration_cap_reaches_exact_checks(self, check):
        """enumeration_cap は厳密検証の順列列挙にも効く"""
        config = {"n": 3, "m": 1, "q": 3}
        assert handle_command({"command": "verify", "check": check, "config": config})["success"] is True
        response = handle_command({"command": "verify", "check": check,
                                   "config": dict(config, enumeration_cap=2)})
        assert response["errorType"] == "ValidationError"
        assert "cap 2" in response["error"]

    @pytest.mark.parametrize("check,target,config", [
        ("components", "verify_component_bound", {"n": 19, "m": 8, "trials": 50}),
        ("qpower", "q_power_expectation_bound", {"n": 19, "m": 86, "q": 166, "trials": 20}),
    ])
    def test_enumeration_cap_reaches_estimators(self, check, target, config):
        """モンテカルロ検証にも enumeration_cap を渡す"""
        with patch(f"shufflesum.cli.handler.{target}", wraps=getattr(handler_module, target)) as wrapped:
            response = handle_command({"command": "verify", "check": check,
                                       "config": dict(config, enumeration_cap=5)})
        assert response["success"] is True
        assert wrapped.call_args.args[-1] == 5
