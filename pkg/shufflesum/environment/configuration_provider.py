"""
Configuration Provider - 実行時設定の提供

実験設定ファイルの値 > 環境変数 > デフォルト値 の優先順位で設定値を解決する
環境変数で変更できるのはワーカー数だけ（結果はワーカー数に依存しない）
"""

import os
import logging
from typing import Any, Dict, Optional

from .environment_manager import ConfigurationError

logger = logging.getLogger(__name__)


class ConfigurationProvider:
    """実行時設定の提供"""

    WORKERS_ENV_VAR = "SHUFFLESUM_WORKERS"

    DEFAULT_WORKERS = 1
    DEFAULT_ENUMERATION_CAP = 8
    DEFAULT_EXACT_CAP = 10 ** 6
    DEFAULT_SIGNIFICANCE = 1e-3

    def __init__(self, service_name: str, settings: Optional[Dict[str, Any]] = None):
        self.service_name = service_name
        self.settings = dict(settings or {})

    def get_worker_count(self) -> int:
        """試行を分割するワーカー数の取得

        Returns:
            ワーカー数（設定ファイルの"workers"、環境変数SHUFFLESUM_WORKERS、デフォルト1の順）

        Raises:
            ConfigurationError: 正の整数でない場合
        """
        raw = self.settings.get("workers")
        source = "config"
        if raw is None:
            raw = os.environ.get(self.WORKERS_ENV_VAR)
            source = self.WORKERS_ENV_VAR
        if raw is None:
            return self.DEFAULT_WORKERS
        return self._positive_int(raw, source)

    def get_enumeration_cap(self) -> int:
        """全順列列挙を許すnの上限"""
        return self._positive_int(self.settings.get("enumeration_cap", self.DEFAULT_ENUMERATION_CAP), "enumeration_cap")

    def get_exact_cap(self) -> int:
        """厳密分布計算を許すq^{mn}の上限"""
        return self._positive_int(self.settings.get("exact_cap", self.DEFAULT_EXACT_CAP), "exact_cap")

    def get_significance(self) -> float:
        """適合度検定の有意水準"""
        value = self.settings.get("significance", self.DEFAULT_SIGNIFICANCE)
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"significance must be a number, got {value!r}")
        if not 0.0 < value < 1.0:
            raise ConfigurationError(f"significance must lie in (0, 1), got {value}")
        return value

    @staticmethod
    def _positive_int(raw: Any, source: str) -> int:
        try:
            value = int(raw)
        except (TypeError, ValueError):
            raise ConfigurationError(f"{source} must be a positive integer, got {raw!r}")
        if value < 1 or (isinstance(raw, float) and raw != value):
            raise ConfigurationError(f"{source} must be a positive integer, got {raw!r}")
        return value
