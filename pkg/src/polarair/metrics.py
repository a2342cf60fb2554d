"""Per-round set metrics and CSV emission."""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .sparse import top_k

ROUND_HEADER = ["epoch", "round", "mode", "channel_uses", "channel_uses_cum", "recovered",
                "pd", "pfa", "b_hat", "active_count", "L", "n_c", "aborted"]
EPOCH_HEADER = ["epoch", "test_accuracy", "Q", "L", "n_c"]


@dataclass(frozen=True)
class SetTaxonomy:
    """A: top-K of the summed sparse gradient, B: rest of its support,
    F: its zeros, A_hat: recovered indices, B_hat = A_hat & B."""

    A: frozenset
    B: frozenset
    N: int
    A_hat: frozenset

    @property
    def F(self):
        return frozenset(range(self.N)) - self.A - self.B

    @property
    def B_hat(self):
        return self.A_hat & self.B


def build_taxonomy(g_sum, recovered, K):
    g_sum = np.asarray(g_sum, dtype=np.float64)
    A = frozenset(top_k(g_sum, K).indices.tolist())
    support = frozenset(np.flatnonzero(g_sum).tolist())
    return SetTaxonomy(A, support - A, g_sum.size, frozenset(int(k) for k in recovered))


class RoundStats(NamedTuple):
    pd: float
    pfa: float
    b_hat: int
    active_count: int


def compute_round_stats(tax):
    hits = len(tax.A_hat & tax.A)
    pd = hits / len(tax.A) if tax.A else 0.0
    pfa = len(tax.A_hat - tax.A) / len(tax.A_hat) if tax.A_hat else 0.0
    return RoundStats(pd, pfa, len(tax.B_hat), len(tax.A) + len(tax.B))


def _fmt(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return format(float(value), ".6g")
    return str(value)


def _write(path, header, rows):
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(row[h]) for h in header])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_records(records, path, epoch_records=(), epoch_path=None):
    """Write round rows to ``path`` and, if given, epoch rows to ``epoch_path``."""
    _write(path, ROUND_HEADER, (r.as_row() for r in records))
    if epoch_path is not None:
        _write(epoch_path, EPOCH_HEADER, (e.as_row() for e in epoch_records))
