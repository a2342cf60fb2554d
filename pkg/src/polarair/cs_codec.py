"""Polar-coded compressed-sensing encoder and iterative SIC recovery.

An index ``k`` is split into ``B_f`` high bits, protected by CRC + polar code,
and ``B_s`` low bits, which select the spreading column ``j`` and fill the
frozen bits. Column ``phi_k`` of the measurement matrix stacks
``b_{i,k} * a_{i,j}`` over the ``n_c`` coded bits.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigurationError
from .polar_code import (CrcSpec, bpsk, build_polar_spec, crc_remainder, frozen_pattern,
                         polar_encode, scl_decode_batch)
from .spreading import build_dictionaries, energy_detect, matched_filter


def index_bits(N):
    return max(1, math.ceil(math.log2(N)))


@dataclass(frozen=True)
class CodecConfig:
    N: int
    K: int
    B_f: int
    B_s: int
    L: int
    n_c: int = 32
    r: int = 8
    n_L: int = 2
    P: float = 1000.0
    seed: int = 0
    max_sic_iters: int = 10
    min_fit: float = 0.6
    crc_poly: int = 0x07
    crc_init: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ConfigurationError(f"N={self.N} must be >= 2", ("N",))
        if self.K < 1:
            raise ConfigurationError(f"K={self.K} must be >= 1", ("K",))
        if self.B_f < 0 or self.B_s < 0 or self.B_f + self.B_s != self.B:
            raise ConfigurationError(
                f"B_f + B_s = {self.B_f} + {self.B_s} must equal ceil(log2 N) = {self.B}",
                ("B_f", "B_s"))
        if self.n_c < 1 or self.n_c & (self.n_c - 1):
            raise ConfigurationError(f"n_c={self.n_c} is not a power of two", ("n_c",))
        if self.B_f + self.r > self.n_c:
            raise ConfigurationError(
                f"B_f + r = {self.B_f + self.r} exceeds n_c = {self.n_c}", ("B_f", "r", "n_c"))
        if self.L < 1:
            raise ConfigurationError(f"L={self.L} must be >= 1", ("L",))
        if self.n_L < 1:
            raise ConfigurationError(f"n_L={self.n_L} must be >= 1", ("n_L",))
        if not self.P > 0:
            raise ConfigurationError(f"P={self.P} must be positive", ("P",))
        if self.max_sic_iters < 1:
            raise ConfigurationError("max_sic_iters must be >= 1", ("max_sic_iters",))
        if not 0.0 <= self.min_fit <= 1.0:
            raise ConfigurationError(f"min_fit={self.min_fit} must lie in [0, 1]", ("min_fit",))
        if self.r and not (0 <= self.crc_poly < (1 << self.r)):
            raise ConfigurationError(f"crc_poly {self.crc_poly:#x} does not fit r={self.r} bits",
                                     ("crc_poly", "r"))

    @property
    def B(self):
        return index_bits(self.N)

    @property
    def J(self):
        return 2 ** self.B_s

    @property
    def m(self):
        return self.L * self.n_c

    @property
    def crc(self):
        return CrcSpec(self.r, self.crc_poly, self.crc_init)


class Termination(str, enum.Enum):
    K_REACHED = "k_reached"
    NO_IMPROVEMENT = "no_improvement"
    MAX_ITERS = "max_iters"


@dataclass
class RecoveredSet:
    indices: np.ndarray
    values: np.ndarray
    sic_rounds_used: int
    terminated_by: Termination
    residual_norms: list = field(default_factory=list)

    def __len__(self):
        return self.indices.size

    @property
    def entries(self):
        return list(zip(self.indices.tolist(), self.values.tolist()))


class LeastSquaresResult(NamedTuple):
    values: np.ndarray  # one per kept column
    kept: list
    dropped: list


def least_squares(y, columns, rtol=1e-10):
    """Least-squares amplitudes of ``y`` on ``columns`` via the normal equations.

    The Gram matrix is Cholesky-factored column by column in the given order;
    a column whose pivot falls below ``rtol`` times its squared norm is
    linearly dependent on earlier ones and is dropped.
    """
    y = np.asarray(y, dtype=np.float64)
    cols = np.asarray(columns, dtype=np.float64).reshape(-1, y.size)
    k = cols.shape[0]
    if k == 0:
        return LeastSquaresResult(np.zeros(0), [], [])
    gram = cols @ cols.T
    rhs = cols @ y
    R = np.zeros((k, k))
    kept, dropped = [], []
    for c in range(k):
        n = len(kept)
        w = solve_triangular(R[:n, :n], gram[kept, c], trans="T") if n else np.zeros(0)
        pivot = gram[c, c] - w @ w
        if gram[c, c] <= 0.0 or pivot <= rtol * gram[c, c]:
            dropped.append(c)
            continue
        R[:n, n] = w
        R[n, n] = math.sqrt(pivot)
        kept.append(c)
    Rk = R[:len(kept), :len(kept)]
    v = solve_triangular(Rk, solve_triangular(Rk, rhs[kept], trans="T"))
    return LeastSquaresResult(v, kept, dropped)


class PolarAirCodec:
    """Encoder and decoder sharing one configuration and dictionary set."""

    def __init__(self, config, dicts=None):
        self.config = config
        self.crc = config.crc
        self.polar = build_polar_spec(config.n_c, config.B_f + config.r)
        self.n_frozen = len(self.polar.frozen_set)
        self.dicts = dicts if dicts is not None else build_dictionaries(config)

    # -- encoding -------------------------------------------------------

    def index_to_parts(self, k):
        """Big-endian ``B``-bit split of ``k`` into (``m_f``, ``m_s``) bit arrays."""
        cfg = self.config
        k = np.asarray(k)
        if np.any(k < 0) or np.any(k >= cfg.N):
            raise ValueError(f"index out of range [0, {cfg.N})")
        shifts = np.arange(cfg.B - 1, -1, -1)
        bits = ((k[..., None] >> shifts) & 1).astype(np.uint8)
        return bits[..., :cfg.B_f], bits[..., cfg.B_f:]

    def column_of(self, k):
        return np.asarray(k) & (self.config.J - 1)

    def frozen_for_column(self, j):
        cfg = self.config
        shifts = np.arange(cfg.B_s - 1, -1, -1)
        ms = ((int(j) >> shifts) & 1).astype(np.uint8)
        return frozen_pattern(ms, self.n_frozen)

    def codewords(self, indices):
        indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        mf, _ = self.index_to_parts(indices)
        msgs = np.stack([np.concatenate([p, crc_remainder(p, self.crc)]) for p in mf]) \
            if indices.size else np.zeros((0, self.polar.payload_len), dtype=np.uint8)
        frozen = np.stack([self.frozen_for_column(j) for j in self.column_of(indices)]) \
            if indices.size else np.zeros((0, self.n_frozen), dtype=np.uint8)
        return polar_encode(msgs, frozen, self.polar)

    def encode_columns(self, indices):
        """Measurement columns ``phi_k`` as rows of a ``(len(indices), m)`` array."""
        indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        cfg = self.config
        if indices.size == 0:
            return np.zeros((0, cfg.m))
        signs = bpsk(self.codewords(indices))  # (n, n_c)
        out = np.empty((indices.size, cfg.n_c, cfg.L))
        for row, (k, j) in enumerate(zip(indices, self.column_of(indices))):
            out[row] = signs[row][:, None] * self.dicts.columns_for(int(j))
        return out.reshape(indices.size, cfg.m)

    def encode_column(self, k):
        return self.encode_columns([k])[0]

    def measure(self, indices, values):
        """``sum_k phi_k g_k`` for a sparse vector given as (indices, values)."""
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            return np.zeros(self.config.m)
        return values @ self.encode_columns(indices)

    # -- recovery -------------------------------------------------------

    def _decode_candidates(self, Z, candidates):
        """Run the +Z and -Z list decoders per candidate column.

        Returns the reconstructed index per candidate (or ``None``), picking
        the better path metric when both sign hypotheses pass the CRC. A
        CRC-passing codeword whose BPSK signs explain less than ``min_fit``
        of the column's matched-filter energy is treated as a false pass.
        """
        cfg = self.config
        est = Z[:, candidates].T  # (n_cand, n_c)
        frozen = np.stack([self.frozen_for_column(j) for j in candidates])
        res = scl_decode_batch(np.concatenate([est, -est]), np.concatenate([frozen, frozen]),
                               self.polar, self.crc, cfg.n_L)
        n = len(candidates)
        found = []
        for c, j in enumerate(candidates):
            pos, neg = res[c], res[c + n]
            best = pos
            if best is None or (neg is not None and neg.metric < best.metric):
                best = neg
            if best is None:
                found.append(None)
                continue
            mf = 0
            for bit in best.payload:
                mf = (mf << 1) | int(bit)
            k = (mf << cfg.B_s) | j
            if k >= cfg.N or self._fit_ratio(k, Z[:, j]) < cfg.min_fit:
                found.append(None)
            else:
                found.append(k)
        return found

    def _fit_ratio(self, k, z):
        b = bpsk(self.codewords([k])[0])
        energy = float(z @ z)
        return float(b @ z) ** 2 / (b.size * energy) if energy > 0 else 0.0

    def recover(self, y_tilde):
        """Iterative matched filter / list decoding / least squares / SIC."""
        cfg = self.config
        y = np.asarray(y_tilde, dtype=np.float64)
        if y.size != cfg.m:
            raise ValueError(f"expected a length-{cfg.m} measurement, got {y.size}")
        order = []  # recovered indices, insertion order
        values = np.zeros(0)
        residual = y.copy()
        norms = [float(np.linalg.norm(residual))]
        terminated = Termination.MAX_ITERS
        rounds = 0
        for rounds in range(1, cfg.max_sic_iters + 1):
            Z = matched_filter(residual, self.dicts)
            energy = np.sum(Z * Z, axis=0)
            exclude = {int(k) & (cfg.J - 1) for k in order}
            count = min(cfg.K - len(order), cfg.J - len(exclude))
            candidates = []
            if count > 0:
                candidates = [j for j in energy_detect(Z, count, exclude) if energy[j] > 0.0]
            known = set(order)
            new = []
            if candidates:
                for k in self._decode_candidates(Z, candidates):
                    if k is not None and k not in known:
                        known.add(k)
                        new.append(k)
            if not new:
                terminated = Termination.NO_IMPROVEMENT
                break
            order, values = self._fit(y, order + new)
            residual = y - values @ self.encode_columns(order) if order else y.copy()
            norms.append(float(np.linalg.norm(residual)))
            if len(order) >= cfg.K:
                terminated = Termination.K_REACHED
                break
        idx = np.asarray(order, dtype=np.int64)
        srt = np.argsort(idx, kind="stable")
        return RecoveredSet(idx[srt], np.asarray(values)[srt], rounds, terminated, norms)

    def _fit(self, y, order):
        cfg = self.config
        ls = least_squares(y, self.encode_columns(order))
        order = [order[c] for c in ls.kept]
        values = ls.values
        if len(order) > cfg.K:
            top = np.sort(np.lexsort((np.arange(len(order)), -np.abs(values)))[:cfg.K])
            order = [order[c] for c in top]
            ls = least_squares(y, self.encode_columns(order))
            order = [order[c] for c in ls.kept]
            values = ls.values
        return order, values
