"""
shufflesum の例外階層

入力検証エラーはすべてValueErrorの派生として扱い、CLIハンドラーでは
ValidationError / PreconditionError として応答に変換する。
"""

from typing import Optional


class InvalidParameterError(ValueError):
    """不正な引数（法・人数・定義域・ラウンド数など）"""
    pass


class PreconditionError(InvalidParameterError):
    """定理・補題の前提条件違反

    Attributes:
        inequality: 破れた不等式（例: "n >= 19"）
    """
    def __init__(self, inequality: str, detail: Optional[str] = None):
        self.inequality = inequality
        self.detail = detail
        message = f"precondition violated: {inequality}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class SizeMismatchError(InvalidParameterError):
    """順列・モデル・入力のサイズ不一致"""
    def __init__(self, expected: int, actual: int, what: str = "size"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what} mismatch: expected {expected}, got {actual}")


class EnumerationCapError(InvalidParameterError):
    """列挙・厳密計算の上限超過"""
    def __init__(self, size: int, cap: int, what: str = "n"):
        self.size = size
        self.cap = cap
        super().__init__(f"{what}={size} exceeds the exact computation cap {cap}")


class UnsupportedModelError(InvalidParameterError):
    """厳密pmfを持たないモデルに対する厳密計算"""
    def __init__(self, variant: str, operation: str = "exact pmf"):
        self.variant = variant
        super().__init__(f"{operation} is not available for {variant} models")
