"""
shufflesum コマンドラインインターフェース

使い方:
    python -m shufflesum params --config configs/params-n1e6.json
    python -m shufflesum simulate --config configs/simulate-eps1.json --out results/eps1.json
    python -m shufflesum verify tvd-chain --config configs/verify-tvd-chain-uniform.json
    python -m shufflesum dist-test --set n=10 --set alpha=0.5

終了コード: 0 すべて成立, 1 検証失敗, 2 設定・前提条件の誤り, 3 内部エラー
"""

import argparse
import json
import logging
from typing import List, Optional

from ..environment import EnvironmentManager, safe_logging_setup
from .config import parse_overrides, read_config_file
from .handler import EXIT_INVALID, SERVICE_NAME, VERIFY_CHECKS, exit_code_for, handle_command
from .reports import write_report

logger = logging.getLogger(__name__)


def _validation_failure(message: str) -> int:
    print(json.dumps({"success": False, "error": message, "errorType": "ValidationError"}, ensure_ascii=False))
    return EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="実験設定（UTF-8のJSONファイル）")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="設定のトップレベルキーを上書き（値はJSONとして解釈）")
    common.add_argument("--out", help="JSONレポートの出力先（CSVは同じ場所に .csv で出力）")
    common.add_argument("--test-mode", action="store_true", help="テスト専用の設定（disable_noise）を許可")
    common.add_argument("--env", choices=EnvironmentManager.VALID_ENVIRONMENTS,
                        help="ログのプロファイル（省略時は SHUFFLESUM_ENV、なければ dev）")

    parser = argparse.ArgumentParser(prog="shufflesum", description="不完全シャッフル下の安全な総和プロトコルの実験ツール")
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("params", parents=[common], help="σ・m・q・p の計画")
    subparsers.add_parser("simulate", parents=[common], help="実数総和推定のシミュレーション")
    verify = subparsers.add_parser("verify", parents=[common], help="上界・補題の検証")
    verify.add_argument("check", choices=VERIFY_CHECKS)
    subparsers.add_parser("dist-test", parents=[common], help="verify polya-dlap の別名")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    safe_logging_setup(SERVICE_NAME, args.env)

    command, check = args.command, getattr(args, "check", None)
    if command == "dist-test":
        command, check = "verify", "polya-dlap"

    try:
        config = read_config_file(args.config)
        config.update(parse_overrides(args.overrides))
    except ValueError as e:
        logger.warning(f"Invalid config: {e}")
        return _validation_failure(str(e))

    response = handle_command({"command": command, "check": check, "config": config, "testMode": args.test_mode})
    if response["success"]:
        write_report(response["report"], args.out)
    else:
        print(json.dumps(response, ensure_ascii=False, sort_keys=True))
    return exit_code_for(response)
