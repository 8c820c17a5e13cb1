"""
shufflesum - 不完全シャッフル下での差分プライバシー付き総和プロトコル

split-and-mix プロトコル、γ-不完全シャッフラーのモデル、実数総和の
符号化・復号、および安全性の境界を厳密計算・モンテカルロで検証する解析群。
"""

__version__ = "1.0.0"
