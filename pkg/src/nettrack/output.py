"""Deterministic artifact writers.

Floats print with 17 significant digits, enough for exact double round-trip,
so repeated runs with the same seed produce byte-identical files.  Every
artifact embeds the resolved scenario and the seed: JSON as keys, CSV as
leading comment lines.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt_float(x: float) -> str:
    x = float(x)
    if x != x:
        return "nan"
    if x == float("inf"):
        return "inf"
    if x == float("-inf"):
        return "-inf"
    s = f"{x:.17g}"
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def _json_fragments(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if x != x or x in (float("inf"), float("-inf")):
            out.append("null")  # JSON has no inf/nan
        else:
            out.append(fmt_float(x))
    elif isinstance(obj, str):
        out.append(
            '"'
            + obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
            + '"'
        )
    elif isinstance(obj, dict):
        parts = []
        for k, v in obj.items():
            sub: list[str] = []
            _json_fragments(v, sub)
            parts.append(f'"{k}": ' + "".join(sub))
        out.append("{" + ", ".join(parts) + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        parts = []
        for v in seq:
            sub = []
            _json_fragments(v, sub)
            parts.append("".join(sub))
        out.append("[" + ", ".join(parts) + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj) -> str:
    out: list[str] = []
    _json_fragments(obj, out)
    return "".join(out)


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(dumps_json(obj) + "\n", encoding="utf-8", newline="\n")


def _cell(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    return str(v)


def write_csv(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence],
    preamble: Sequence[str] = (),
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in preamble:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def scenario_preamble(resolved: dict, seed: int) -> list[str]:
    return [f"scenario: {dumps_json(resolved)}", f"seed: {seed}"]
