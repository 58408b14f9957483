"""Tabular ingestion and supervised discretization.

Every sample ends up as a row of categorical tokens, one per feature:
``feature:value`` for categoricals and ``feature:lo_to_hi`` for binned
numerics (``feature:NULL`` when the value is missing).
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

NULL = "NULL"
TOKEN_SEP = ":"
RANGE_SEP = "_to_"

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class DataError(ValueError):
    """Raised for malformed input files or datasets."""


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[tuple[str, str], ...]
    label_column: str
    positive_label: str

    def __post_init__(self):
        names = [name for name, _ in self.features]
        if any(not n for n in names):
            raise DataError("feature names must be non-empty")
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        for name, kind in self.features:
            if kind not in (NUMERIC, CATEGORICAL):
                raise DataError(f"feature {name!r}: unknown kind {kind!r}")
            if TOKEN_SEP in name:
                raise DataError(f"feature {name!r} may not contain {TOKEN_SEP!r}")
        if self.label_column in names:
            raise DataError(f"label column {self.label_column!r} is also a feature")

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.features]

    def kind(self, name: str) -> str:
        return dict(self.features)[name]

    @property
    def numeric(self) -> list[str]:
        return [n for n, k in self.features if k == NUMERIC]

    def subset(self, names: Sequence[str]) -> "FeatureSchema":
        kinds = dict(self.features)
        return FeatureSchema(tuple((n, kinds[n]) for n in names), self.label_column, self.positive_label)

    def dumps(self) -> str:
        lines = [f"{name},{kind}" for name, kind in self.features]
        lines.append(f"label,{self.label_column},{self.positive_label}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "FeatureSchema":
        features = []
        label = None
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) == 3 and parts[0] == "label":
                label = (parts[1], parts[2])
            elif len(parts) == 2:
                features.append((parts[0], parts[1]))
            else:
                raise DataError(f"schema line {lineno}: expected 'name,kind' or 'label,<column>,<positive>'")
        if label is None:
            raise DataError("schema has no 'label,<column>,<positive_label>' line")
        return cls(tuple(features), label[0], label[1])

    @classmethod
    def load(cls, path: str | Path) -> "FeatureSchema":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read schema {path}: {exc}") from exc
        return cls.loads(text)


@dataclass
class RawDataset:
    """Parsed rows in schema feature order.

    Numeric cells are floats (``nan`` marks a missing value); categorical
    cells are strings (``"NULL"`` for missing).
    """

    schema: FeatureSchema
    rows: list[tuple]
    labels: list[int]

    def __len__(self):
        return len(self.rows)

    def take(self, indices: Iterable[int]) -> "RawDataset":
        indices = list(indices)
        return RawDataset(self.schema, [self.rows[i] for i in indices], [self.labels[i] for i in indices])

    def column(self, name: str) -> list:
        j = self.schema.names.index(name)
        return [row[j] for row in self.rows]


def parse_value(cell: str, kind: str):
    cell = cell.strip()
    if kind == CATEGORICAL:
        return cell if cell else NULL
    if cell == "" or cell.upper() in (NULL, "NA", "NAN"):
        return math.nan
    return float(cell)


def _read_rows(path: str | Path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DataError(f"{path}: empty file (no header)")
            return [h.strip() for h in header], list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def load_csv(path: str | Path, schema: FeatureSchema, require_label: bool = True) -> RawDataset:
    """Read a CSV whose header covers the schema (any column order).

    Without ``require_label`` the label column may be absent, in which
    case every label is 0.
    """
    header, records = _read_rows(path)
    wanted = schema.names + ([schema.label_column] if require_label else [])
    missing = [name for name in wanted if name not in header]
    if missing:
        raise DataError(f"{path}: header is missing columns {missing}")
    pos = {name: header.index(name) for name in schema.names}
    label_idx = header.index(schema.label_column) if schema.label_column in header else None
    kinds = [kind for _, kind in schema.features]

    rows, labels = [], []
    for i, rec in enumerate(records):
        if not rec:
            continue
        if len(rec) != len(header):
            raise DataError(f"{path}: row {i} has {len(rec)} cells, header has {len(header)}")
        row = []
        for (name, kind) in zip(schema.names, kinds):
            cell = rec[pos[name]]
            try:
                row.append(parse_value(cell, kind))
            except ValueError:
                raise DataError(f"{path}: row {i}, column {name!r}: cannot parse {cell!r} as a number") from None
        rows.append(tuple(row))
        if label_idx is None:
            labels.append(0)
        else:
            labels.append(1 if rec[label_idx].strip() == schema.positive_label else 0)
    return RawDataset(schema, rows, labels)


def write_csv(path: str | Path, data: RawDataset) -> None:
    """Write a raw dataset back out; positive labels use the schema's positive value."""
    pos = data.schema.positive_label
    neg = "0" if pos != "0" else "1"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(data.schema.names + [data.schema.label_column])
        for row, y in zip(data.rows, data.labels):
            cells = ["" if isinstance(v, float) and math.isnan(v) else _plain(v) for v in row]
            w.writerow(cells + [pos if y else neg])


def _plain(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------------------
# MDLP discretization
# ---------------------------------------------------------------------------


def _entropy(counts: np.ndarray) -> np.ndarray:
    """Binary class entropy (bits) of rows of ``[n0, n1]`` counts."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        terms = np.where(p > 0, -p * np.log2(p), 0.0)
    return terms.sum(axis=-1)


def _midpoint(a: float, b: float) -> float:
    mid = (a + b) / 2.0
    # drop float noise such as 29.650000000000002 when it keeps the cut strictly inside (a, b)
    tidy = float(format(mid, ".12g"))
    return tidy if a < tidy < b else mid


def _best_split(x: np.ndarray, y: np.ndarray):
    """Best boundary cut of sorted ``x`` by weighted class entropy.

    Returns ``(cut, t, weighted_entropy)`` where ``t`` is the number of
    samples left of the cut, or ``None`` when no boundary exists.
    """
    n = len(x)
    ones = np.cumsum(y)
    # candidate positions: last index of each run of equal values
    ends = np.flatnonzero(x[1:] != x[:-1])
    if len(ends) == 0:
        return None
    # class composition of each distinct value: a cut between two values that
    # are both pure in the same class is never a boundary point
    starts = np.concatenate(([0], ends + 1))
    stops = np.concatenate((ends + 1, [n]))
    pos_in_run = np.add.reduceat(y, starts)
    run_len = stops - starts
    pure = np.where(pos_in_run == 0, 0, np.where(pos_in_run == run_len, 1, -1))
    boundary = ~((pure[:-1] == pure[1:]) & (pure[:-1] >= 0))
    ends = ends[boundary]
    if len(ends) == 0:
        return None

    t = ends + 1
    left1 = ones[ends]
    left = np.stack([t - left1, left1], axis=1)
    right1 = ones[-1] - left1
    right = np.stack([(n - t) - right1, right1], axis=1)
    weighted = (t * _entropy(left) + (n - t) * _entropy(right)) / n
    best = int(np.argmin(weighted))
    i = ends[best]
    return _midpoint(float(x[i]), float(x[i + 1])), int(t[best]), float(weighted[best])


def _mdl_accepts(y: np.ndarray, t: int, weighted: float) -> bool:
    n = len(y)
    yl, yr = y[:t], y[t:]
    ent = float(_entropy(np.bincount(y, minlength=2)))
    gain = ent - weighted
    k = len(np.unique(y))
    k1 = len(np.unique(yl))
    k2 = len(np.unique(yr))
    ent1 = float(_entropy(np.bincount(yl, minlength=2)))
    ent2 = float(_entropy(np.bincount(yr, minlength=2)))
    delta = math.log2(3**k - 2) - (k * ent - k1 * ent1 - k2 * ent2)
    return gain > (math.log2(n - 1) + delta) / n


def mdlp_cut_points(values: Sequence[float], labels: Sequence[int]) -> list[float]:
    """Fayyad-Irani recursive entropy discretization with the MDL stopping rule.

    NaN values are ignored. Returns sorted cut points, possibly empty.
    """
    x = np.asarray(values, dtype=float)
    y = np.asarray(labels, dtype=np.int64)
    keep = ~np.isnan(x)
    x, y = x[keep], y[keep]
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]

    cuts: list[float] = []
    stack = [(0, len(x))]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        xs, ys = x[lo:hi], y[lo:hi]
        found = _best_split(xs, ys)
        if found is None:
            continue
        cut, t, weighted = found
        if not _mdl_accepts(ys, t, weighted):
            continue
        cuts.append(cut)
        stack.append((lo, lo + t))
        stack.append((lo + t, hi))
    return sorted(cuts)


# ---------------------------------------------------------------------------
# Tokens and bins
# ---------------------------------------------------------------------------


def format_number(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(float(v))


@dataclass(frozen=True)
class BinBoundary:
    feature: str
    cut_points: tuple[float, ...] = ()

    def __post_init__(self):
        cuts = tuple(float(c) for c in self.cut_points)
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise DataError(f"{self.feature}: cut points must be strictly increasing")
        object.__setattr__(self, "cut_points", cuts)

    def interval(self, value: float) -> tuple[float, float]:
        """Bin ``(lo, hi]`` containing ``value``; edge bins are unbounded."""
        edges = (-math.inf,) + self.cut_points + (math.inf,)
        i = bisect.bisect_left(self.cut_points, value)
        return edges[i], edges[i + 1]

    def token(self, value: float) -> str:
        if value is None or math.isnan(value):
            return f"{self.feature}{TOKEN_SEP}{NULL}"
        lo, hi = self.interval(value)
        return f"{self.feature}{TOKEN_SEP}{format_number(lo)}{RANGE_SEP}{format_number(hi)}"

    def tokens(self) -> list[str]:
        """All tokens this boundary can emit, NULL bin last."""
        edges = (-math.inf,) + self.cut_points + (math.inf,)
        out = [f"{self.feature}{TOKEN_SEP}{format_number(a)}{RANGE_SEP}{format_number(b)}" for a, b in zip(edges, edges[1:])]
        return out + [f"{self.feature}{TOKEN_SEP}{NULL}"]


def split_token(token: str) -> tuple[str, str]:
    feature, sep, value = token.partition(TOKEN_SEP)
    if not sep:
        raise ValueError(f"malformed token {token!r}")
    return feature, value


def parse_range(value: str) -> tuple[float, float] | None:
    """``"lo_to_hi"`` -> ``(lo, hi)``; ``None`` when ``value`` is not a numeric range."""
    lo, sep, hi = value.partition(RANGE_SEP)
    if not sep:
        return None
    try:
        return float(lo), float(hi)
    except ValueError:
        return None


@dataclass(frozen=True)
class DiscretizedDataset:
    schema: FeatureSchema
    samples: tuple[tuple[str, ...], ...]
    labels: tuple[int, ...]
    boundaries: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.samples) != len(self.labels):
            raise DataError("samples and labels differ in length")
        width = len(self.schema.features)
        for i, row in enumerate(self.samples):
            if len(row) != width:
                raise DataError(f"sample {i} has {len(row)} tokens, schema has {width} features")

    def __len__(self):
        return len(self.samples)

    @property
    def n_positive(self) -> int:
        return sum(self.labels)

    def take(self, indices: Iterable[int]) -> "DiscretizedDataset":
        indices = list(indices)
        return DiscretizedDataset(
            self.schema,
            tuple(self.samples[i] for i in indices),
            tuple(self.labels[i] for i in indices),
            self.boundaries,
        )


def fit_boundaries(raw: RawDataset) -> dict[str, BinBoundary]:
    """MDLP cut points for every numeric feature, learned from ``raw`` labels."""
    out = {}
    for name in raw.schema.numeric:
        out[name] = BinBoundary(name, tuple(mdlp_cut_points(raw.column(name), raw.labels)))
    return out


def tokenize_row(row: Sequence, schema: FeatureSchema, boundaries: dict[str, BinBoundary]) -> tuple[str, ...]:
    tokens = []
    for value, (name, kind) in zip(row, schema.features):
        if kind == NUMERIC:
            tokens.append(boundaries[name].token(value))
        else:
            tokens.append(f"{name}{TOKEN_SEP}{value if value != '' else NULL}")
    return tuple(tokens)


def discretize_dataset(
    raw: RawDataset,
    boundaries: dict[str, BinBoundary] | None = None,
) -> DiscretizedDataset:
    """Tokenize ``raw``; boundaries are fitted on ``raw`` when not supplied.

    Pass the training split's boundaries to discretize test data.
    """
    if boundaries is None:
        boundaries = fit_boundaries(raw)
    missing = [n for n in raw.schema.numeric if n not in boundaries]
    if missing:
        raise DataError(f"no bin boundaries for numeric features {missing}")
    samples = tuple(tokenize_row(row, raw.schema, boundaries) for row in raw.rows)
    return DiscretizedDataset(raw.schema, samples, tuple(raw.labels), dict(boundaries))


def from_token_rows(rows: Sequence[Sequence[str]], labels: Sequence[int], label_column: str = "label") -> DiscretizedDataset:
    """Build a dataset directly from token rows; features are read off the first row."""
    if rows:
        names = [split_token(t)[0] for t in rows[0]]
    else:
        names = []
    schema = FeatureSchema(tuple((n, CATEGORICAL) for n in names), label_column, "1")
    return DiscretizedDataset(schema, tuple(tuple(r) for r in rows), tuple(int(y) for y in labels))
