"""Polar encoder, CRC and CRC-aided list decoder protecting index bits."""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError
from .kernels import scl_batch


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PolarSpec:
    n_c: int
    payload_len: int
    info_set: tuple
    frozen_set: tuple
    info_mask: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class CrcSpec:
    """CRC of ``width`` bits; ``poly`` omits the implicit leading x^width term."""

    width: int = 8
    poly: int = 0x07
    init: int = 0

    def __post_init__(self):
        if self.width < 0:
            raise ConfigurationError("crc width must be >= 0")
        if self.width and not (0 <= self.poly < (1 << self.width)):
            raise ConfigurationError(f"crc poly {self.poly:#x} does not fit in {self.width} bits")


def bhattacharyya(n_c, design_z=0.5):
    """Bhattacharyya parameters of the ``n_c`` synthetic channels (natural order)."""
    if not _is_pow2(n_c):
        raise ConfigurationError(f"n_c={n_c} is not a power of two")
    z = np.array([design_z])
    while z.size < n_c:
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


@lru_cache(maxsize=None)
def build_polar_spec(n_c, payload_len):
    """Pick the ``payload_len`` most reliable positions of an ``n_c`` code.

    Reliability is the Bhattacharyya parameter at design erasure probability
    0.5; equal parameters favour the higher position.
    """
    if not _is_pow2(n_c):
        raise ConfigurationError(f"n_c={n_c} is not a power of two")
    if payload_len < 0 or payload_len > n_c:
        raise ConfigurationError(f"payload_len={payload_len} does not fit a length-{n_c} code")
    z = bhattacharyya(n_c)
    pos = np.arange(n_c)
    order = np.lexsort((-pos, z))
    info = np.sort(order[:payload_len])
    mask = np.zeros(n_c, dtype=bool)
    mask[info] = True
    mask.setflags(write=False)
    frozen = np.flatnonzero(~mask)
    return PolarSpec(n_c, payload_len, tuple(int(i) for i in info),
                     tuple(int(i) for i in frozen), mask)


def crc_remainder(bits, spec):
    """MSB-first CRC register over ``bits``; returns ``spec.width`` bits."""
    r = spec.width
    if r == 0:
        return np.zeros(0, dtype=np.uint8)
    mask = (1 << r) - 1
    reg = spec.init & mask
    for bit in np.asarray(bits, dtype=np.uint8):
        top = ((reg >> (r - 1)) & 1) ^ int(bit)
        reg = (reg << 1) & mask
        if top:
            reg ^= spec.poly
    return np.array([(reg >> (r - 1 - t)) & 1 for t in range(r)], dtype=np.uint8)


def crc_append(payload, spec):
    payload = np.asarray(payload, dtype=np.uint8)
    return np.concatenate([payload, crc_remainder(payload, spec)])


def crc_check(message, spec):
    message = np.asarray(message, dtype=np.uint8)
    if spec.width == 0:
        return True
    body, tail = message[:-spec.width], message[-spec.width:]
    return bool(np.array_equal(crc_remainder(body, spec), tail))


def frozen_pattern(ms_bits, n_frozen):
    """Repeat the column-selector bits cyclically over the frozen positions."""
    ms_bits = np.asarray(ms_bits, dtype=np.uint8)
    if n_frozen == 0:
        return np.zeros(0, dtype=np.uint8)
    if ms_bits.size == 0:
        return np.zeros(n_frozen, dtype=np.uint8)
    return np.resize(ms_bits, n_frozen)


def polar_transform(u):
    """GF(2) product ``u F^{(x)n}`` in natural order; accepts a leading batch axis."""
    x = np.array(u, dtype=np.uint8)
    n_c = x.shape[-1]
    if not _is_pow2(n_c):
        raise ValueError(f"length {n_c} is not a power of two")
    lead = x.shape[:-1]
    x = x.reshape(-1, n_c)
    h = 1
    while h < n_c:
        v = x.reshape(x.shape[0], n_c // (2 * h), 2, h)
        v[:, :, 0, :] ^= v[:, :, 1, :]
        h *= 2
    return x.reshape(lead + (n_c,))


def polar_encode(payload_with_crc, frozen, spec):
    payload_with_crc = np.asarray(payload_with_crc, dtype=np.uint8)
    frozen = np.asarray(frozen, dtype=np.uint8)
    if payload_with_crc.shape[-1] != spec.payload_len:
        raise ValueError(f"payload length {payload_with_crc.shape[-1]} != {spec.payload_len}")
    if frozen.shape[-1] != len(spec.frozen_set):
        raise ValueError(f"frozen length {frozen.shape[-1]} != {len(spec.frozen_set)}")
    lead = np.broadcast_shapes(payload_with_crc.shape[:-1], frozen.shape[:-1])
    u = np.zeros(lead + (spec.n_c,), dtype=np.uint8)
    u[..., list(spec.info_set)] = payload_with_crc
    u[..., list(spec.frozen_set)] = frozen
    return polar_transform(u)


def bpsk(bits):
    """Bit 0 -> +1, bit 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def estimates_to_llr(estimates):
    # observations of +-A in unit noise, rescaled to unit amplitude
    est = np.asarray(estimates, dtype=np.float64)
    amp = np.mean(np.abs(est), axis=-1, keepdims=True)
    safe = np.where(amp > 0, amp, 1.0)
    return np.where(amp > 0, 2.0 * est / safe, 0.0)


class SclResult(NamedTuple):
    payload: np.ndarray
    metric: float


def scl_decode_batch(estimates, frozen, spec, crc, list_size):
    """CRC-aided list decoding of a batch of soft bit estimates.

    ``estimates`` is (B, n_c) and ``frozen`` is (B, |frozen_set|). Returns a
    list with one entry per row: the CRC-passing path with the lowest path
    metric (lowest list index on ties), or ``None``.
    """
    estimates = np.atleast_2d(np.asarray(estimates, dtype=np.float64))
    frozen = np.atleast_2d(np.asarray(frozen, dtype=np.uint8))
    batch = estimates.shape[0]
    if estimates.shape[1] != spec.n_c:
        raise ValueError(f"expected {spec.n_c} bit estimates, got {estimates.shape[1]}")
    if frozen.shape != (batch, len(spec.frozen_set)):
        raise ValueError(f"frozen pattern shape {frozen.shape} does not match the code")
    if list_size < 1:
        raise ValueError("list_size must be >= 1")
    if spec.payload_len < crc.width:
        raise ValueError("payload shorter than the CRC")

    full = np.zeros((batch, spec.n_c), dtype=np.uint8)
    full[:, list(spec.frozen_set)] = frozen
    u, pm, n_active = scl_batch(estimates_to_llr(estimates), spec.info_mask, full, list_size)

    info = list(spec.info_set)
    data_len = spec.payload_len - crc.width
    results = []
    for b in range(batch):
        found = None
        for p in np.argsort(pm[b, :n_active], kind="stable"):
            msg = u[b, p, info]
            if crc_check(msg, crc):
                found = SclResult(msg[:data_len].copy(), float(pm[b, p]))
                break
        results.append(found)
    return results


def scl_decode(estimates, frozen, spec, crc, list_size) -> Optional[SclResult]:
    return scl_decode_batch(np.asarray(estimates)[None, :], np.asarray(frozen)[None, :],
                            spec, crc, list_size)[0]
