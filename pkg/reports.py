"""
Render command results as JSON, CSV or text and save them under the data directory
"""
import csv
import io
import json
import logging
from enum import Enum
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

logger = logging.getLogger(__name__)


def to_plain(obj):
    """Payload with exact rationals as "p/q" strings and only JSON-native types left."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(obj, 20)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return format(float(obj), ".12g")
    return obj


class ReportWriter:
    def __init__(self, data_dir='data'):
        self.data_dir = Path(data_dir)

    def render(self, payload, fmt='json'):
        """Payload as text in the given format."""
        plain = to_plain(payload)
        if fmt == 'json':
            return json.dumps(plain, indent=2, sort_keys=True, ensure_ascii=False)
        if fmt == 'csv':
            return self._render_csv(plain)
        return self._render_text(plain)

    def _render_csv(self, plain):
        rows = plain if isinstance(plain, list) else [plain]
        if not rows:
            return ""
        fields = list(rows[0].keys())
        for row in rows[1:]:
            fields.extend(k for k in row if k not in fields)
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: self._cell(row.get(k)) for k in fields})
        return out.getvalue().rstrip("\n")

    @staticmethod
    def _cell(value):
        if isinstance(value, (dict, list)):
            return json.dumps(value, sort_keys=True, ensure_ascii=False)
        if value is None:
            return ""
        return value

    def _render_text(self, plain):
        if isinstance(plain, list):
            return "\n".join(self._text_line(row) for row in plain)
        lines = []
        for key in sorted(plain):
            value = plain[key]
            if isinstance(value, list) and value and isinstance(value[0], dict):
                lines.append(f"{key}:")
                lines.extend(f"  {self._text_line(row)}" for row in value)
            elif isinstance(value, (dict, list)):
                lines.append(f"{key}: {json.dumps(value, sort_keys=True, ensure_ascii=False)}")
            else:
                lines.append(f"{key}: {value}")
        return "\n".join(lines)

    @staticmethod
    def _text_line(row):
        if not isinstance(row, dict):
            return str(row)
        return "  ".join(f"{k}={json.dumps(v, ensure_ascii=False) if isinstance(v, (dict, list)) else v}"
                         for k, v in row.items())

    def write(self, text, path):
        """Write a rendering to path, creating parent directories."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
            f.write("\n")
        logger.info("wrote %s", path)
        return path

    def save_json(self, payload, filename):
        """Save a JSON copy of payload under data_dir."""
        self.data_dir.mkdir(parents=True, exist_ok=True)
        return self.write(self.render(payload, 'json'), self.data_dir / filename)

