"""Deterministic report serialization: canonical JSON and flat CSV.

JSON uses sorted keys and fixed indentation so identical analyses yield
byte-identical files.  The CSV form flattens the report into dotted key
paths with JSON-encoded leaves (floats written with 17 significant
digits), which round-trips exactly through :func:`report_from_csv`.
"""

from __future__ import annotations

import csv
import io
import json
import re

from .errors import DataError

_INDEX_RE = re.compile(r"\[(\d+)\]")


def to_json(report: dict) -> str:
    """Canonical JSON text for a report dictionary."""
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def from_json(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON report: {exc}") from exc


def _encode_leaf(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return json.dumps(value)


def _flatten(value, path: str, out: list[tuple[str, str]]) -> None:
    # Empty containers are written as leaves so they survive round-trips.
    if isinstance(value, dict) and value:
        for key in sorted(value):
            sub = f"{path}.{key}" if path else str(key)
            _flatten(value[key], sub, out)
    elif isinstance(value, list) and value:
        for i, item in enumerate(value):
            _flatten(item, f"{path}[{i}]", out)
    else:
        out.append((path, _encode_leaf(value)))


def to_csv(report: dict) -> str:
    """Flat key/value CSV for a report dictionary (lossless)."""
    rows: list[tuple[str, str]] = []
    _flatten(report, "", rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["field", "value"])
    writer.writerows(rows)
    return buf.getvalue()


def _assign(root: dict, path: str, value) -> None:
    # Split "a.b[2].c" into ("a", "b", 2, "c").
    parts: list[object] = []
    for chunk in path.split("."):
        m = _INDEX_RE.search(chunk)
        if m:
            parts.append(chunk[: m.start()])
            parts.extend(int(i) for i in _INDEX_RE.findall(chunk))
        else:
            parts.append(chunk)
    node = root
    for here, nxt in zip(parts, parts[1:] + [None]):
        if nxt is None:
            if isinstance(node, list):
                node.append(value)
            else:
                node[here] = value
            break
        child_type = list if isinstance(nxt, int) else dict
        if isinstance(node, list):
            if here == len(node):
                node.append(child_type())
            node = node[here]
        else:
            node = node.setdefault(here, child_type())


def report_from_csv(text: str) -> dict:
    """Rebuild a report dictionary from its flat CSV form."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty CSV report") from None
    if header != ["field", "value"]:
        raise DataError(f"unexpected CSV report header: {header}")
    root: dict = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise DataError(f"CSV report line {lineno}: expected 2 fields, got {len(row)}")
        key, raw = row
        try:
            value = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DataError(f"CSV report line {lineno}: bad value {raw!r}: {exc}") from exc
        _assign(root, key, value)
    return root


def sweep_to_csv(rows: list[tuple[int, float]]) -> str:
    """CSV text for a fold sweep: header ``folds,probability``."""
    lines = ["folds,probability"]
    lines += [f"{m},{format(p, '.17g')}" for m, p in rows]
    return "\n".join(lines) + "\n"


def sweep_from_csv(text: str) -> list[tuple[int, float]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "folds,probability":
        raise DataError("sweep CSV must start with header 'folds,probability'")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            m_str, p_str = line.split(",")
            rows.append((int(m_str), float(p_str)))
        except ValueError as exc:
            raise DataError(f"sweep CSV line {lineno}: {line!r}") from exc
    return rows
