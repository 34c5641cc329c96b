"""Result rows and their CSV serialization.

One CSV per experiment, header `experiment,<coords...>,metric,value,ci_low,
ci_high,trials,seed`, UTF-8, LF line endings, floats as shortest round-trip
decimals. Reading a written file back reproduces the rows exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

_FIXED_HEAD = ["experiment"]
_FIXED_TAIL = ["metric", "value", "ci_low", "ci_high", "trials", "seed"]


@dataclass
class ResultRow:
    experiment: str
    coords: dict[str, object] = field(default_factory=dict)
    metric: str = ""
    value: float = 0.0
    ci_low: float = 0.0
    ci_high: float = 0.0
    trials: int = 0
    seed: int = 0

    def __post_init__(self):
        if not self.ci_low <= self.value <= self.ci_high:
            raise ValueError(
                f"interval [{self.ci_low}, {self.ci_high}] does not cover {self.value}"
            )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: list[ResultRow], path) -> None:
    """Write rows to `path`; every row must carry the same coordinate keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coord_keys = list(rows[0].coords.keys()) if rows else []
    header = _FIXED_HEAD + coord_keys + _FIXED_TAIL
    lines = [",".join(header)]
    for row in rows:
        if list(row.coords.keys()) != coord_keys:
            raise ValueError("rows carry inconsistent coordinate keys")
        cells = (
            [row.experiment]
            + [_fmt(row.coords[k]) for k in coord_keys]
            + [
                row.metric,
                _fmt(float(row.value)),
                _fmt(float(row.ci_low)),
                _fmt(float(row.ci_high)),
                str(int(row.trials)),
                str(int(row.seed)),
            ]
        )
        lines.append(",".join(cells))
    path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def _parse_coord(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        return text
    # tokens like "inf" are labels (e.g. continuous phase mode), not numbers
    return value if math.isfinite(value) else text


def read_csv(path) -> list[ResultRow]:
    """Inverse of write_csv."""
    lines = Path(path).read_bytes().decode("utf-8").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[:1] != _FIXED_HEAD or header[-6:] != _FIXED_TAIL:
        raise ValueError(f"{path}: unexpected header {header}")
    coord_keys = header[1:-6]
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        coords = {k: _parse_coord(v) for k, v in zip(coord_keys, cells[1:-6])}
        metric, value, lo, hi, trials, seed = cells[-6:]
        rows.append(
            ResultRow(
                experiment=cells[0],
                coords=coords,
                metric=metric,
                value=float(value),
                ci_low=float(lo),
                ci_high=float(hi),
                trials=int(trials),
                seed=int(seed),
            )
        )
    return rows
