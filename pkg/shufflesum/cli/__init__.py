"""
cli - shufflesum のコマンドラインフロントエンド
"""

from .handler import exit_code_for, handle_command
from .main import build_parser, main

__all__ = ['build_parser', 'exit_code_for', 'handle_command', 'main']
