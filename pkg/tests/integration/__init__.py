# 統合テスト
