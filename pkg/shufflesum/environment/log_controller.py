"""
Log Controller - プロファイル別ログ制御

ログは常にstderrに出し、stdoutのレポートと混ざらないようにする。
dev は人間向けの1行形式、stage/prod は1行1レコードのJSON。
実験コンテキスト（command, check, seed）は experiment_logger で付与する。
"""

import logging
import json
import sys
from datetime import datetime, timezone
from typing import Any, Dict, Optional

from .environment_manager import EnvironmentManager

CONTEXT_FIELDS = ("command", "check", "seed")


class LogController:
    """プロファイル別ログ制御"""

    LOG_LEVELS = {
        "dev": logging.DEBUG,
        "stage": logging.INFO,
        "prod": logging.WARNING
    }

    def __init__(self, service_name: str, environment: Optional[str] = None):
        self.service_name = service_name
        self.environment = EnvironmentManager.get_environment(environment)
        self.level = self.LOG_LEVELS[self.environment]
        self.setup_logging()

    def setup_logging(self):
        root_logger = logging.getLogger()
        root_logger.setLevel(self.level)
        for handler in root_logger.handlers[:]:
            root_logger.removeHandler(handler)

        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(self.level)
        if self.environment == "dev":
            handler.setFormatter(DevFormatter(self.service_name, self.environment))
        else:
            handler.setFormatter(JSONFormatter(self.service_name, self.environment))
        root_logger.addHandler(handler)

        logging.getLogger(__name__).debug(
            f"Log level set to {logging.getLevelName(self.level)} for environment {self.environment}"
        )


def _context(record: logging.LogRecord) -> Dict[str, Any]:
    return {key: getattr(record, key) for key in CONTEXT_FIELDS if getattr(record, key, None) is not None}


class DevFormatter(logging.Formatter):
    """dev 用: 時刻 - ロガー - レベル - [service:env command/check seed=N] - メッセージ"""

    def __init__(self, service_name: str, environment: str):
        super().__init__('%(asctime)s - %(name)s - %(levelname)s - [%(tag)s] - %(message)s')
        self.service_name = service_name
        self.environment = environment

    def format(self, record: logging.LogRecord) -> str:
        context = _context(record)
        tag = f"{self.service_name}:{self.environment}"
        if "command" in context:
            tag += " " + "/".join(str(context[k]) for k in ("command", "check") if k in context)
        if "seed" in context:
            tag += f" seed={context['seed']}"
        record.tag = tag
        return super().format(record)


class JSONFormatter(logging.Formatter):
    """stage/prod 用の JSON 形式"""

    def __init__(self, service_name: str, environment: str):
        super().__init__()
        self.service_name = service_name
        self.environment = environment

    def format(self, record: logging.LogRecord) -> str:
        log_entry = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'level': record.levelname,
            'service': self.service_name,
            'environment': self.environment,
            'logger': record.name,
            'message': record.getMessage(),
        }
        log_entry.update(_context(record))
        if record.exc_info:
            log_entry['exception'] = self.formatException(record.exc_info)
        return json.dumps(log_entry, ensure_ascii=False, default=str)


def experiment_logger(logger: logging.Logger, command: Optional[str], check: Optional[str] = None,
                      seed: Optional[int] = None) -> logging.LoggerAdapter:
    """実験コンテキストを全レコードに付けるアダプタ"""
    return logging.LoggerAdapter(logger, {"command": command, "check": check, "seed": seed})


def safe_logging_setup(service_name: str, environment: Optional[str] = None) -> Optional[LogController]:
    """ログ設定（失敗時は基本設定にフォールバック）

    Raises:
        InvalidEnvironmentError: environment が明示されていて不正な場合
    """
    EnvironmentManager.get_environment(environment)
    try:
        return LogController(service_name, environment)
    except Exception as e:
        logging.basicConfig(
            level=logging.INFO,
            stream=sys.stderr,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        logger = logging.getLogger(__name__)
        logger.error(f"Failed to setup logging: {e}")
        return None
