from typing import Dict, List
from datetime import datetime
import logging
import os

import orjson

from config import DEFAULT_REPORT_DIR


class ReportFormatter:
    """Render verification reports as JSON or readable text"""

    def __init__(self, report_dir: str = DEFAULT_REPORT_DIR):
        self.report_dir = report_dir
        self.logger = logging.getLogger(__name__)

    def to_json(self, report: Dict) -> str:
        """Deterministic JSON: sorted keys, two-space indent"""
        return orjson.dumps(report, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS).decode() + "\n"

    def to_text(self, report: Dict) -> str:
        """Readable summary of a sharp-bound or excluded-case report"""
        text = self._create_header(report)
        for check in report.get("checks", []):
            text += self._format_check(check)
        if report.get("error"):
            text += f"\n❌ Error: {report['error']}\n"
        return text

    def _create_header(self, report: Dict) -> str:
        loops = "/".join(str(s) for s in report.get("loops", []))
        status = "✅ PASSED" if report.get("passed") else "❌ FAILED"
        if report.get("kind") == "excluded":
            details = [
                f"s1 = {report['s1']} at loop {report['loop_index']}, r = {report['r']}",
                f"Candidates: {report['candidate_count']}",
                f"Closure order: {report['closure_order']}",
                f"Filtered order: {report['filtered_order']}",
            ]
            title = f"Excluded case {loops}"
        else:
            details = [
                f"Parity vector: {''.join(str(bit) for bit in report.get('parity_vector', []))}",
                f"Certified generators: {report['generator_count']}",
                f"Image order: {report['image_order']} (expected {report['expected_order']})",
            ]
            title = f"Sharp bound {loops}"
        return f"# {title}: {status}\n\n" + "\n".join(details) + "\n\n"

    def _format_check(self, check: Dict) -> str:
        if check.get("skipped"):
            mark = "⏭️"
        else:
            mark = "✅" if check["passed"] else "❌"
        return f"{mark} {check['name']}: {check.get('detail', '')}\n"

    def summary_line(self, reports: List[Dict]) -> str:
        passed = sum(1 for report in reports if report.get("passed"))
        return f"🎯 Verification Results: {passed}/{len(reports)} passed"

    def save(self, report: Dict, path: str = None) -> str:
        """Write the JSON report; default path is <report_dir>/<kind>_<loops>_<timestamp>.json"""
        if path is None:
            loops = "-".join(str(s) for s in report.get("loops", []))
            stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            path = os.path.join(self.report_dir, f"{report.get('kind', 'report')}_{loops}_{stamp}.json")

        directory = os.path.dirname(path)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
            self.logger.info(f"📁 Created report directory: {directory}")

        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json(report))
        self.logger.info(f"💾 Report saved: {path}")
        return path
