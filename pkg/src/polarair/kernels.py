"""Successive-cancellation list decoding kernels.

Two interchangeable implementations of the same batched decoder:

* ``scl_batch_numba``: scalar loops compiled with numba.
* ``scl_batch_numpy``: vectorised over (batch, list path) with plain numpy.

Both take channel LLRs for a natural-order polar code ``x = u F^{(x)n}`` and
return every surviving list path. The public entry point ``scl_batch``
dispatches on the backend chosen in :mod:`polarair._backend`.

Tree layout: depth 0 is the root (length ``n_c``), depth ``d`` holds the
currently active node of length ``n_c >> d``. ``alpha[d]`` are the node LLRs,
``beta_left[d]`` the partial codeword of the left sibling at depth ``d``.
"""

import math

import numpy as np

from ._backend import HAS_NUMBA, njit


# ---------------------------------------------------------------- numba path

@njit(cache=True)
def _softplus(x):
    if x > 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@njit(cache=True)
def _boxplus(a, b):
    s = 1.0
    if a < 0.0:
        s = -s
    if b < 0.0:
        s = -s
    if a == 0.0 or b == 0.0:
        s = 0.0
    m = min(abs(a), abs(b))
    return s * m + math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))


@njit(cache=True)
def _start_depth(i, n):
    if i == 0:
        return 1
    for d in range(1, n + 1):
        if (i >> (n - d)) != ((i - 1) >> (n - d)):
            return d
    return n


@njit(cache=True)
def _descend(alpha, beta_left, i, n, n_c):
    for d in range(_start_depth(i, n), n + 1):
        half = n_c >> d
        if (i >> (n - d)) & 1:
            for j in range(half):
                sgn = 1.0 - 2.0 * beta_left[d, j]
                alpha[d, j] = alpha[d - 1, j + half] + sgn * alpha[d - 1, j]
        else:
            for j in range(half):
                alpha[d, j] = _boxplus(alpha[d - 1, j], alpha[d - 1, j + half])


@njit(cache=True)
def _ascend(beta_left, bit, i, n, n_c, scratch):
    scratch[0] = bit
    length = 1
    for d in range(n, 0, -1):
        if ((i >> (n - d)) & 1) == 0:
            for j in range(length):
                beta_left[d, j] = scratch[j]
            return
        # right child: parent partial codeword is (left ^ right, right)
        for j in range(length):
            scratch[j + length] = scratch[j]
            scratch[j] = beta_left[d, j] ^ scratch[j]
        length *= 2


@njit(cache=True)
def scl_batch_numba(llr, info_mask, frozen_bits, list_size):
    batch, n_c = llr.shape
    n = 0
    while (1 << n) < n_c:
        n += 1
    cap = list_size
    out_u = np.zeros((batch, cap, n_c), dtype=np.uint8)
    out_pm = np.full((batch, cap), np.inf)
    n_active = 1

    alpha = np.zeros((cap, n + 1, n_c))
    beta = np.zeros((cap, n + 1, n_c), dtype=np.uint8)
    u = np.zeros((cap, n_c), dtype=np.uint8)
    pm = np.zeros(cap)
    alpha2 = np.zeros_like(alpha)
    beta2 = np.zeros_like(beta)
    u2 = np.zeros_like(u)
    pm2 = np.zeros(cap)
    cand = np.zeros(2 * cap)
    scratch = np.zeros(n_c, dtype=np.uint8)

    for b in range(batch):
        alpha[:] = 0.0
        beta[:] = 0
        u[:] = 0
        pm[:] = 0.0
        alpha[0, 0, :] = llr[b]
        active = 1
        for i in range(n_c):
            for p in range(active):
                _descend(alpha[p], beta[p], i, n, n_c)
            if not info_mask[i]:
                v = frozen_bits[b, i]
                for p in range(active):
                    lam = alpha[p, n, 0]
                    pm[p] += _softplus(-(1.0 - 2.0 * v) * lam)
                    u[p, i] = v
            else:
                for p in range(active):
                    lam = alpha[p, n, 0]
                    cand[2 * p] = pm[p] + _softplus(-lam)
                    cand[2 * p + 1] = pm[p] + _softplus(lam)
                n_cand = 2 * active
                if n_cand <= cap:
                    keep = np.arange(n_cand)
                else:
                    order = np.argsort(cand[:n_cand], kind="mergesort")
                    keep = np.sort(order[:cap])
                for q in range(keep.shape[0]):
                    parent = keep[q] // 2
                    alpha2[q] = alpha[parent]
                    beta2[q] = beta[parent]
                    u2[q] = u[parent]
                    u2[q, i] = keep[q] % 2
                    pm2[q] = cand[keep[q]]
                active = keep.shape[0]
                alpha, alpha2 = alpha2, alpha
                beta, beta2 = beta2, beta
                u, u2 = u2, u
                pm, pm2 = pm2, pm
            for p in range(active):
                _ascend(beta[p], u[p, i], i, n, n_c, scratch)
        out_u[b, :active] = u[:active]
        out_pm[b, :active] = pm[:active]
        n_active = active
    return out_u, out_pm, n_active


# ---------------------------------------------------------------- numpy path

def _softplus_np(x):
    return np.logaddexp(0.0, x)


def _boxplus_np(a, b):
    return (np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
            + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b))))


def scl_batch_numpy(llr, info_mask, frozen_bits, list_size):
    llr = np.asarray(llr, dtype=np.float64)
    batch, n_c = llr.shape
    n = n_c.bit_length() - 1
    rows = np.arange(batch)[:, None]

    # state arrays: (batch, paths, depth, position)
    alpha = np.zeros((batch, 1, n + 1, n_c))
    alpha[:, 0, 0, :] = llr
    beta = np.zeros((batch, 1, n + 1, n_c), dtype=np.uint8)
    u = np.zeros((batch, 1, n_c), dtype=np.uint8)
    pm = np.zeros((batch, 1))

    for i in range(n_c):
        d0 = 1 if i == 0 else next(d for d in range(1, n + 1)
                                   if (i >> (n - d)) != ((i - 1) >> (n - d)))
        for d in range(d0, n + 1):
            half = n_c >> d
            top = alpha[:, :, d - 1, :half]
            bot = alpha[:, :, d - 1, half:2 * half]
            if (i >> (n - d)) & 1:
                sgn = 1.0 - 2.0 * beta[:, :, d, :half]
                alpha[:, :, d, :half] = bot + sgn * top
            else:
                alpha[:, :, d, :half] = _boxplus_np(top, bot)
        lam = alpha[:, :, n, 0]

        if not info_mask[i]:
            v = frozen_bits[:, i].astype(np.float64)[:, None]
            pm = pm + _softplus_np(-(1.0 - 2.0 * v) * lam)
            u[:, :, i] = frozen_bits[:, i][:, None]
        else:
            active = pm.shape[1]
            cand = np.empty((batch, 2 * active))
            cand[:, 0::2] = pm + _softplus_np(-lam)
            cand[:, 1::2] = pm + _softplus_np(lam)
            if 2 * active <= list_size:
                keep = np.broadcast_to(np.arange(2 * active), (batch, 2 * active))
            else:
                order = np.argsort(cand, axis=1, kind="stable")
                keep = np.sort(order[:, :list_size], axis=1)
            parent = keep // 2
            alpha = alpha[rows, parent]
            beta = beta[rows, parent]
            u = u[rows, parent]
            u[:, :, i] = (keep % 2).astype(np.uint8)
            pm = np.take_along_axis(cand, keep, axis=1)

        # propagate the decided bit up the tree
        part = u[:, :, i:i + 1].copy()
        for d in range(n, 0, -1):
            length = part.shape[2]
            if ((i >> (n - d)) & 1) == 0:
                beta[:, :, d, :length] = part
                break
            part = np.concatenate([beta[:, :, d, :length] ^ part, part], axis=2)

    active = pm.shape[1]
    out_u = np.zeros((batch, list_size, n_c), dtype=np.uint8)
    out_pm = np.full((batch, list_size), np.inf)
    out_u[:, :active] = u
    out_pm[:, :active] = pm
    return out_u, out_pm, active


def scl_batch(llr, info_mask, frozen_bits, list_size):
    """Decode a batch of polar codewords, returning every surviving list path.

    Parameters
    ----------
    llr : (B, n_c) float array
        Channel LLRs, positive favouring bit 0.
    info_mask : (n_c,) bool array
        True at information positions.
    frozen_bits : (B, n_c) uint8 array
        Known bit values; only read at frozen positions.
    list_size : int

    Returns
    -------
    u : (B, list_size, n_c) uint8
        Decoded input vectors per path.
    pm : (B, list_size) float
        Path metrics (lower is better); ``inf`` for unused slots.
    n_active : int
        Number of valid paths (identical across the batch).
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    info_mask = np.ascontiguousarray(info_mask, dtype=np.bool_)
    frozen_bits = np.ascontiguousarray(frozen_bits, dtype=np.uint8)
    if HAS_NUMBA:
        return scl_batch_numba(llr, info_mask, frozen_bits, int(list_size))
    return scl_batch_numpy(llr, info_mask, frozen_bits, int(list_size))
