# ユニットテスト
