"""Export functionality for strategies, tradeoff rows and run reports."""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from .analysis import CSV_FIELDS, TradeoffRow
from .bases import SQRT_HALF, Basis, Signal
from .config import TOL
from .errors import RejectedInputError
from .measurement import Povm
from .probe import Strategy

STRATEGY_FORMAT = "bb84-probe/strategy"
STRATEGY_VERSION = 1
SIGNIFICANT_DIGITS = 12

PathLike = Union[str, Path]


def format_float(x: float) -> str:
    """Fixed 12-significant-digit rendering used by every report."""
    return f"{float(x):.{SIGNIFICANT_DIGITS}g}"


def round_floats(obj: Any) -> Any:
    """Round every float in a JSON-ready structure to 12 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        return float(format_float(obj))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def _complex_to_dict(values: np.ndarray) -> Dict[str, Any]:
    arr = np.asarray(values, dtype=np.complex128)
    return {"real": arr.real.tolist(), "imag": arr.imag.tolist()}


def _complex_from_dict(doc: Dict[str, Any]) -> np.ndarray:
    return np.asarray(doc["real"], dtype=np.float64) + 1j * np.asarray(doc["imag"], dtype=np.float64)


def strategy_to_dict(s: Strategy) -> Dict[str, Any]:
    """Lossless document: full-precision images of the four signals and both measurements."""
    return {
        "format": STRATEGY_FORMAT,
        "version": STRATEGY_VERSION,
        "probe_dim": s.probe_dim,
        "images": {sig.value: _complex_to_dict(s.images[sig]) for sig in Signal},
        "measurements": {
            b.value: [_complex_to_dict(e) for e in s.measurement(b)]
            for b in Basis
        },
    }


def strategy_from_dict(doc: Dict[str, Any]) -> Strategy:
    if doc.get("format") != STRATEGY_FORMAT or doc.get("version") != STRATEGY_VERSION:
        raise RejectedInputError(f"Not a version-{STRATEGY_VERSION} {STRATEGY_FORMAT} document")
    images = doc["images"]
    isometry = np.column_stack([_complex_from_dict(images[Signal.X.value]), _complex_from_dict(images[Signal.Y.value])])
    x, y = isometry[:, 0], isometry[:, 1]
    for sig, expected in ((Signal.U, SQRT_HALF * (x + y)), (Signal.V, SQRT_HALF * (x - y))):
        if not np.allclose(_complex_from_dict(images[sig.value]), expected, rtol=0.0, atol=TOL.algebraic):
            raise RejectedInputError(f"Image of {sig.value} is not the linear combination of the x and y images")
    meas = {
        key: Povm(tuple(_complex_from_dict(e) for e in doc["measurements"][key]))
        for key in ("xy", "uv")
    }
    return Strategy(int(doc["probe_dim"]), isometry, meas["xy"], meas["uv"])


def write_text(text: str, filepath: Optional[PathLike] = None) -> None:
    """UTF-8 with LF line endings, to stdout when no path is given."""
    if filepath is None:
        sys.stdout.write(text)
        return
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def write_json_document(data: Any, filepath: Optional[PathLike] = None) -> None:
    """Indented JSON with a trailing newline."""
    write_text(json.dumps(data, indent=2) + "\n", filepath)


def export_strategy_to_json(s: Strategy, filepath: Optional[PathLike] = None) -> None:
    write_json_document(strategy_to_dict(s), filepath)


def load_strategy(filepath: PathLike) -> Strategy:
    with open(filepath, encoding="utf-8") as f:
        return strategy_from_dict(json.load(f))


def _csv_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return format_float(value)


def rows_to_csv(rows: Sequence[TradeoffRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([_csv_cell(getattr(row, name)) for name in CSV_FIELDS])
    return buffer.getvalue()


def rows_to_json(rows: Sequence[TradeoffRow]) -> List[Dict[str, Any]]:
    return [round_floats({name: getattr(row, name) for name in CSV_FIELDS}) for row in rows]


def write_rows(rows: Sequence[TradeoffRow], fmt: str = "csv", filepath: Optional[PathLike] = None) -> None:
    """Write tradeoff rows as CSV or as a JSON array of objects with the same field names."""
    if fmt == "json":
        write_json_document(rows_to_json(rows), filepath)
        return
    if fmt != "csv":
        raise RejectedInputError(f"Unknown format {fmt!r}")
    write_text(rows_to_csv(rows), filepath)