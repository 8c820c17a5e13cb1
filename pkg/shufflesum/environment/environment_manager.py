"""
Environment Manager - 実行プロファイルの判定

--env オプション > SHUFFLESUM_ENV 環境変数 > "dev" の順にプロファイルを決める。
プロファイルはログの形式とレベルだけを切り替え、計算結果には影響しない。
"""

import os
import logging
from typing import Optional

logger = logging.getLogger(__name__)


class EnvironmentManager:
    """実行プロファイルの判定"""

    VALID_ENVIRONMENTS = ("dev", "stage", "prod")
    DEFAULT_ENVIRONMENT = "dev"
    ENV_VAR = "SHUFFLESUM_ENV"

    @classmethod
    def get_environment(cls, override: Optional[str] = None) -> str:
        """現在のプロファイルを取得

        Args:
            override: コマンドラインで明示された値（不正なら例外）

        Raises:
            InvalidEnvironmentError: override が不正な場合
        """
        if override is not None:
            if override not in cls.VALID_ENVIRONMENTS:
                raise InvalidEnvironmentError(override)
            return override
        env = os.environ.get(cls.ENV_VAR, cls.DEFAULT_ENVIRONMENT)
        if env not in cls.VALID_ENVIRONMENTS:
            logger.error(f"Invalid {cls.ENV_VAR}={env}, defaulting to {cls.DEFAULT_ENVIRONMENT}")
            return cls.DEFAULT_ENVIRONMENT
        return env


class EnvironmentError(Exception):
    """実行環境関連のエラー"""
    pass


class InvalidEnvironmentError(EnvironmentError, ValueError):
    """無効なプロファイル名"""
    def __init__(self, environment: str):
        self.environment = environment
        super().__init__(
            f"Invalid environment: {environment} (expected one of {', '.join(EnvironmentManager.VALID_ENVIRONMENTS)})"
        )


class ConfigurationError(EnvironmentError, ValueError):
    """設定値のエラー（ValueErrorとしても扱える）"""
    pass
