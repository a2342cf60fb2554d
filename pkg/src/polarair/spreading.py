"""Spreading dictionaries, matched filter and energy detector.

Dictionary ``i`` is an ``L x J`` matrix of signs scaled by ``1/sqrt(N)``. The
signs come from a Philox counter-based stream keyed by the seed, one stream
per section ``i``. Column ``j`` occupies a fixed, 256-bit aligned block of
that stream, so any single column can be regenerated without materialising
the rest.
"""

import numpy as np

from .errors import ConfigurationError

DEFAULT_MEMORY_BUDGET = 256 * 2**20  # bytes of float64 dictionary kept resident


def _blocks_per_column(L):
    return -(-L // 256)


def _signs_from_raw(raw, n_cols, L):
    bits = np.unpackbits(raw.view(np.uint8), bitorder="little")
    bits = bits.reshape(n_cols, -1)[:, :L]
    return (1 - 2 * bits.astype(np.int8)).T  # (L, n_cols)


class SpreadingDictionaries:
    """The ``n_c`` spreading dictionaries shared by every worker and the PS."""

    def __init__(self, n_c, L, J, N, seed, memory_budget=DEFAULT_MEMORY_BUDGET):
        if min(n_c, L, J, N) < 1:
            raise ConfigurationError(f"dictionary dimensions must be >= 1, got n_c={n_c} L={L} J={J} N={N}")
        self.n_c, self.L, self.J, self.N = int(n_c), int(L), int(J), int(N)
        self.seed = int(seed) % 2**64
        self.scale = 1.0 / np.sqrt(self.N)
        self._blocks = _blocks_per_column(self.L)
        self._dense = None
        if self.n_c * self.L * self.J * 8 <= memory_budget:
            self._dense = np.stack([self._generate_section(i) for i in range(self.n_c)])

    @property
    def materialized(self):
        return self._dense is not None

    def _stream(self, i):
        return np.random.Philox(key=self.seed, counter=[0, 0, 0, i])

    def _generate_section(self, i):
        raw = self._stream(i).random_raw(self.J * self._blocks * 4)
        return _signs_from_raw(raw, self.J, self.L) * self.scale

    def section(self, i):
        """``A_i`` as an ``(L, J)`` float array."""
        if self._dense is not None:
            return self._dense[i]
        return self._generate_section(i)

    def column(self, i, j):
        """Spreading sequence ``a_{i,j}`` generated on demand."""
        if not (0 <= i < self.n_c and 0 <= j < self.J):
            raise IndexError(f"column ({i}, {j}) outside {self.n_c} x {self.J}")
        if self._dense is not None:
            return self._dense[i, :, j].copy()
        bg = self._stream(i)
        bg.advance(j * self._blocks)
        raw = bg.random_raw(self._blocks * 4)
        return _signs_from_raw(raw, 1, self.L)[:, 0] * self.scale

    def columns_for(self, j):
        """``(n_c, L)`` array stacking ``a_{i,j}`` over sections ``i``."""
        if self._dense is not None:
            return self._dense[:, :, j].copy()
        return np.stack([self.column(i, j) for i in range(self.n_c)])


def build_dictionaries(config, memory_budget=DEFAULT_MEMORY_BUDGET):
    return SpreadingDictionaries(config.n_c, config.L, config.J, config.N, config.seed,
                                 memory_budget=memory_budget)


def matched_filter(y_sections, dicts):
    """``Z[i, j] = <a_{i,j}, y_i>`` for every section ``i`` and column ``j``."""
    y = np.asarray(y_sections, dtype=np.float64)
    if y.ndim == 1:
        if y.size != dicts.n_c * dicts.L:
            raise ValueError(f"measurement length {y.size} != n_c*L = {dicts.n_c * dicts.L}")
        y = y.reshape(dicts.n_c, dicts.L)
    if y.shape != (dicts.n_c, dicts.L):
        raise ValueError(f"expected sections of shape {(dicts.n_c, dicts.L)}, got {y.shape}")
    if dicts.materialized:
        return np.einsum("ilj,il->ij", dicts._dense, y)
    return np.stack([y[i] @ dicts.section(i) for i in range(dicts.n_c)])


def column_energies(Z):
    return np.sum(np.square(Z), axis=0)


def energy_detect(Z, count, exclude=()):
    """Columns with the largest ``sum_i Z[i, j]^2``, descending, ties by index."""
    Z = np.asarray(Z, dtype=np.float64)
    J = Z.shape[1]
    excluded = {int(j) for j in exclude if 0 <= j < J}
    if count < 1 or count > J - len(excluded):
        raise ValueError(f"cannot select {count} of {J - len(excluded)} available columns")
    energy = column_energies(Z)
    order = np.lexsort((np.arange(J), -energy))
    picked = [int(j) for j in order if j not in excluded]
    return picked[:count]
