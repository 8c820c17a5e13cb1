"""
実行レポート

JSONレポートには設定のエコー・結果・ライブラリのバージョンを含め、
レポート単体から同じ実行を再現できるようにする。CSVは --out と同じ場所に書き出す。
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import attrs
import numpy as np
from attrs import field, frozen

from .. import __version__
from ..permutations import Permutation

logger = logging.getLogger(__name__)


def to_jsonable(obj: Any) -> Any:
    """レポートに載せる値をJSONで表現できる形に変換"""
    if isinstance(obj, Permutation):
        return list(obj.images)
    if attrs.has(type(obj)):
        return {k: to_jsonable(v) for k, v in attrs.asdict(obj, recurse=False).items()}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        # JSONに無限大はないので文字列で表す
        return value if math.isfinite(value) else str(value)
    return obj


@frozen
class RunReport:
    """1回のCLI実行の結果"""
    command: str
    check: Optional[str]
    config: Dict[str, Any]
    results: Dict[str, Any]
    passed: bool
    version: str = __version__
    timing: Optional[float] = None
    csv_rows: List[Dict[str, Any]] = field(factory=list, eq=False, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        report = {
            "command": self.command,
            "check": self.check,
            "config": to_jsonable(self.config),
            "results": to_jsonable(self.results),
            "passed": self.passed,
            "version": self.version,
        }
        if self.timing is not None:
            report["timing_seconds"] = self.timing
        return report

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True)


def csv_text(rows: Sequence[Dict[str, Any]]) -> str:
    """ヘッダー行つきCSV（浮動小数点は repr の全精度）"""
    if not rows:
        return ""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in row.items()})
    return buffer.getvalue()


def csv_path_for(out: str) -> Path:
    """--out のレポートの隣に置くCSVのパス"""
    return Path(out).with_suffix(".csv")


def write_report(report: RunReport, out: Optional[str]) -> Optional[Path]:
    """
    レポートを書き出す（outがNoneなら標準出力）

    Returns:
        書き出したCSVのパス（CSVがなければNone）
    """
    text = report.to_json()
    if out is None:
        print(text)
        if report.csv_rows:
            logger.info("CSV rows are written only together with --out")
        return None

    Path(out).write_text(text + "\n", encoding="utf-8")
    logger.info(f"Report written to {out}")
    if not report.csv_rows:
        return None
    path = csv_path_for(out)
    path.write_text(csv_text(report.csv_rows), encoding="utf-8")
    logger.info(f"CSV written to {path}")
    return path
