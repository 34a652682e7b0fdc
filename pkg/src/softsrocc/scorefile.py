"""Reading and writing ``sample_id,mos,pred`` score files."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ParseError

HEADER = "sample_id,mos,pred"


@dataclass
class ScoreFile:
    ids: list
    mos: np.ndarray
    pred: np.ndarray

    def __len__(self):
        return len(self.ids)


def parse_scores(text, min_rows=2):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].rstrip("\r") != HEADER:
        raise ParseError(f"header must be exactly {HEADER!r}", line=1)
    ids, mos, pred = [], [], []
    seen = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip("\r")
        if not line:
            raise ParseError("blank line", line=lineno)
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected 3 fields, got {len(parts)}", line=lineno)
        sid = parts[0]
        if not sid:
            raise ParseError("empty sample_id", line=lineno)
        if sid in seen:
            raise ParseError(f"duplicate sample_id {sid!r}", line=lineno)
        try:
            m, p = float(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"not a number: {parts[1]!r} / {parts[2]!r}", line=lineno) from None
        if not (math.isfinite(m) and math.isfinite(p)):
            raise ParseError("non-finite value", line=lineno)
        seen.add(sid)
        ids.append(sid)
        mos.append(m)
        pred.append(p)
    if len(ids) < min_rows:
        raise ParseError(f"need at least {min_rows} rows, got {len(ids)}", line=len(lines))
    return ScoreFile(ids, np.array(mos), np.array(pred))


def read_scores(path, min_rows=2):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_scores(fh.read(), min_rows)


def format_scores(scores):
    rows = [HEADER]
    for sid, m, p in zip(scores.ids, scores.mos, scores.pred):
        if "," in sid or "\n" in sid:
            raise ValueError(f"sample_id {sid!r} contains a separator")
        rows.append(f"{sid},{m:.17g},{p:.17g}")
    return "\n".join(rows) + "\n"


def write_scores(path, scores):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_scores(scores))
