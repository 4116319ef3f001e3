"""Serialisation helpers: JSON/NDJSON with 17 significant digits and CSV."""

from __future__ import annotations

import csv
import json
import math
from json.encoder import _make_iterencode, encode_basestring_ascii  # noqa: PLC2701

import numpy as np

__all__ = ["fmt17", "fmt6", "dumps", "write_json", "write_ndjson", "write_csv", "read_csv"]


def fmt17(x):
    return format(float(x), ".17g")


def fmt6(x):
    return format(float(x), ".6g")


def _floatstr(o):
    if math.isnan(o):
        return "NaN"
    if math.isinf(o):
        return "Infinity" if o > 0 else "-Infinity"
    return fmt17(o)


def _plain(obj):
    """Turn numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _reject(o):
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def dumps(obj, indent=None):
    """``json.dumps`` that writes every float with 17 significant digits."""
    obj = _plain(obj)
    encoder = _make_iterencode(
        {}, _reject, encode_basestring_ascii, " " * indent if indent else None, _floatstr,
        ": ", "," if indent else ", ", False, False, True,
    )
    return "".join(encoder(obj, 0))


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj, indent=2))
        fh.write("\n")


def write_ndjson(path, records):
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps(rec))
            fh.write("\n")
            count += 1
    return count


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt17(v)
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
