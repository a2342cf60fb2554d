"""Federated training loop over the simulated over-the-air channel."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .cs_codec import PolarAirCodec
from .errors import ConfigurationError, DegenerateNormalizerError
from .metrics import build_taxonomy, compute_round_stats
from .ota_channel import channel_uses, mac_transmit, power_encode, ps_preprocess
from .sparse import SparseVector, top_k
from .toy_model import AdamState, accuracy, adam_step, forward_backward, init_params, synth_dataset

log = logging.getLogger(__name__)


@dataclass
class WorkerState:
    worker_id: int
    error: np.ndarray  # accumulated sparsification residual, length N
    shard: np.ndarray = None
    batch_size: int = 0


def worker_round(state, g, K):
    """Error-feedback top-K: returns the sparse vector and the updated state."""
    g = np.asarray(g, dtype=np.float64)
    if g.shape != state.error.shape:
        raise ValueError(f"gradient length {g.size} != {state.error.size}")
    accumulated = g + state.error
    sparse = top_k(accumulated, K)
    residual = accumulated.copy()
    residual[sparse.indices] -= sparse.values
    return sparse, WorkerState(state.worker_id, residual, state.shard, state.batch_size)


@dataclass
class OptimizerState:
    kind: str
    adam: AdamState = None

    @classmethod
    def create(cls, kind, n):
        return cls(kind, AdamState.zeros(n) if kind == "adam" else None)


def ps_update(theta, estimate, opt, lr):
    """Apply the densified estimate as the gradient; indices past ``theta`` are dropped."""
    g = estimate.dense(theta.size)
    if opt.kind == "sgd":
        return theta - lr * g, opt
    theta, adam = adam_step(theta, opt.adam, g, lr)
    return theta, OptimizerState(opt.kind, adam)


@dataclass
class PolicyState:
    L: int
    n_c: int
    n_c_bump_used: bool = False
    recovered_counts: list = field(default_factory=list)
    last_q: float = float("nan")


def adaptive_policy_step(policy, K):
    """End-of-epoch growth: the first time Q <= K/2 adds 32 to n_c, later times add 100 to L."""
    counts = policy.recovered_counts
    q = sum(counts) / len(counts) if counts else 0.0
    L, n_c, bumped = policy.L, policy.n_c, policy.n_c_bump_used
    if q <= K / 2:
        if not bumped:
            n_c += 32
            if n_c & (n_c - 1):
                raise ConfigurationError(f"n_c={n_c} after growth is not a power of two", ("n_c",))
            bumped = True
        else:
            L += 100
    return PolicyState(L, n_c, bumped, [], q)


@dataclass(frozen=True)
class RoundRecord:
    epoch: int
    round: int
    mode: str
    channel_uses: int
    channel_uses_cum: int
    recovered: int
    pd: float
    pfa: float
    b_hat: int
    active_count: int
    L: int
    n_c: int
    aborted: bool

    def as_row(self):
        return self.__dict__


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    test_accuracy: float
    Q: float
    L: int
    n_c: int

    def as_row(self):
        return self.__dict__


@dataclass
class ExperimentResult:
    rounds: list
    epochs: list
    theta: np.ndarray = None

    def uses_to_target(self, target):
        """Cumulative channel uses at the end of the first epoch reaching ``target``."""
        for e in self.epochs:
            if e.test_accuracy >= target:
                return max(r.channel_uses_cum for r in self.rounds if r.epoch <= e.epoch)
        return None


def _synthetic_gradient(rng, N, K):
    g = np.zeros(N)
    g[rng.choice(N, K, replace=False)] = rng.normal(size=K)
    return g


def run_experiment(cfg):
    """Run ``cfg.epochs`` epochs of federated training and collect the records."""
    seeds = np.random.SeedSequence(cfg.seed).spawn(4)
    data_rng, init_rng, batch_rng, noise_rng = (np.random.default_rng(s) for s in seeds)
    W, N, K = cfg.workers, cfg.N, cfg.K

    shape = cfg.model_shape
    if cfg.gradient_source == "mlp":
        data = synth_dataset(cfg.d_out, cfg.d_in, cfg.n_train, cfg.n_test, W,
                             cfg.class_sep, cfg.cluster_std, seed=data_rng)
        rounds_per_epoch = min(len(s) for s in data.shards) // cfg.batch_size
    else:
        data = None
        rounds_per_epoch = max(1, cfg.n_train // (W * cfg.batch_size))
    theta = init_params(shape, init_rng) if data is not None else np.zeros(N)
    opt = OptimizerState.create(cfg.optimizer, theta.size)
    workers = [WorkerState(w, np.zeros(N), data.shards[w] if data else None, cfg.batch_size)
               for w in range(W)]

    policy = PolicyState(cfg.L, cfg.n_c)
    codec = None
    if cfg.mode == "polarair":
        codec = PolarAirCodec(cfg.codec_config(policy.L, policy.n_c))

    rounds, epochs = [], []
    cum = 0
    for epoch in range(1, cfg.epochs + 1):
        perms = [batch_rng.permutation(len(w.shard)) if data else None for w in workers]
        for c in range(rounds_per_epoch):
            sparse = []
            for w, state in enumerate(workers):
                if data is not None:
                    rows = state.shard[perms[w][c * cfg.batch_size:(c + 1) * cfg.batch_size]]
                    _, g = forward_backward(theta, shape, data.X_train[rows], data.y_train[rows])
                    g = np.concatenate([g, np.zeros(N - g.size)])
                else:
                    g = _synthetic_gradient(batch_rng, N, K)
                sv, workers[w] = worker_round(state, g, K)
                sparse.append(sv)
            g_sum = np.zeros(N)
            for sv in sparse:
                g_sum[sv.indices] += sv.values

            aborted = False
            if cfg.mode == "dense":
                nz = np.flatnonzero(g_sum)
                estimate = SparseVector(nz, g_sum[nz] / W, N)
                uses = N
            else:
                frames = [power_encode(codec.measure(sv.indices, sv.values), cfg.P) for sv in sparse]
                uses = channel_uses(codec.config.m)
                out = mac_transmit(frames, cfg.noise_std, noise_rng)
                try:
                    rec = codec.recover(ps_preprocess(out))
                    vals = rec.values / W if cfg.rescale_by_workers else rec.values
                    estimate = SparseVector(rec.indices, vals, N)
                except DegenerateNormalizerError as exc:
                    log.warning("epoch %d round %d aborted: %s", epoch, c + 1, exc)
                    aborted = True
                    estimate = SparseVector.empty(N)
            cum += uses

            stats = compute_round_stats(build_taxonomy(g_sum, estimate.indices, K))
            rounds.append(RoundRecord(epoch, c + 1, cfg.mode, uses, cum, len(estimate), stats.pd,
                                      stats.pfa, stats.b_hat, stats.active_count, policy.L,
                                      policy.n_c, aborted))
            policy.recovered_counts.append(len(estimate))
            if not aborted:
                theta, opt = ps_update(theta, estimate, opt, cfg.lr)

        acc = accuracy(theta, shape, data.X_test, data.y_test) if data else math.nan
        L_used, n_c_used = policy.L, policy.n_c
        if cfg.mode == "polarair" and cfg.adaptive:
            policy = adaptive_policy_step(policy, K)
            if (policy.L, policy.n_c) != (L_used, n_c_used):
                log.info("epoch %d: Q=%.2f, growing (L, n_c) to (%d, %d)",
                         epoch, policy.last_q, policy.L, policy.n_c)
                codec = PolarAirCodec(cfg.codec_config(policy.L, policy.n_c))
        else:
            counts = policy.recovered_counts
            policy = PolicyState(policy.L, policy.n_c, policy.n_c_bump_used, [],
                                 sum(counts) / len(counts) if counts else 0.0)
        epochs.append(EpochRecord(epoch, acc, policy.last_q, L_used, n_c_used))
        log.info("epoch %d: accuracy %.4f, Q %.2f", epoch, acc, policy.last_q)
    return ExperimentResult(rounds, epochs, theta)
