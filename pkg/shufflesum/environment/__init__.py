"""
実行環境 - プロファイルの判定・設定値の解決・ログ制御
"""

from .environment_manager import EnvironmentManager, EnvironmentError, InvalidEnvironmentError, ConfigurationError
from .configuration_provider import ConfigurationProvider
from .log_controller import LogController, experiment_logger, safe_logging_setup

__all__ = [
    "EnvironmentManager",
    "EnvironmentError",
    "InvalidEnvironmentError",
    "ConfigurationError",
    "ConfigurationProvider",
    "LogController",
    "experiment_logger",
    "safe_logging_setup"
]
