"""One-hidden-layer tanh MLP, Gaussian-mixture data and ADAM.

Parameters live in one flat vector ordered as W1 (d_in x d_h, row-major),
b1, W2 (d_h x d_out, row-major), b2.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class MlpShape:
    d_in: int = 32
    d_h: int = 128
    d_out: int = 4

    @property
    def n_params(self):
        return self.d_in * self.d_h + self.d_h + self.d_h * self.d_out + self.d_out

    def unflatten(self, theta):
        i, h, o = self.d_in, self.d_h, self.d_out
        s1 = i * h
        s2 = s1 + h
        s3 = s2 + h * o
        return (theta[:s1].reshape(i, h), theta[s1:s2],
                theta[s2:s3].reshape(h, o), theta[s3:s3 + o])


def init_params(shape, rng):
    w1 = rng.normal(scale=1.0 / np.sqrt(shape.d_in), size=(shape.d_in, shape.d_h))
    w2 = rng.normal(scale=1.0 / np.sqrt(shape.d_h), size=(shape.d_h, shape.d_out))
    return np.concatenate([w1.ravel(), np.zeros(shape.d_h), w2.ravel(), np.zeros(shape.d_out)])


def logits(theta, shape, X):
    w1, b1, w2, b2 = shape.unflatten(theta)
    return np.tanh(X @ w1 + b1) @ w2 + b2


def forward_backward(theta, shape, X, y):
    """Mean softmax cross-entropy over the batch and its gradient."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    w1, b1, w2, b2 = shape.unflatten(theta)
    n = X.shape[0]
    hidden = np.tanh(X @ w1 + b1)
    z = hidden @ w2 + b2
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -logp[np.arange(n), y].mean()

    dz = np.exp(logp)
    dz[np.arange(n), y] -= 1.0
    dz /= n
    dw2 = hidden.T @ dz
    db2 = dz.sum(axis=0)
    dpre = (dz @ w2.T) * (1.0 - hidden * hidden)
    dw1 = X.T @ dpre
    db1 = dpre.sum(axis=0)
    grad = np.concatenate([dw1.ravel(), db1, dw2.ravel(), db2])
    return float(loss), grad


def accuracy(theta, shape, X, y):
    return float(np.mean(np.argmax(logits(theta, shape, X), axis=1) == y))


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(theta, state, g, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Bias-corrected ADAM update; returns new (theta, state)."""
    if state.m.shape != theta.shape:
        raise ValueError("optimizer state does not match parameter shape")
    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * g
    v = beta2 * state.v + (1.0 - beta2) * g * g
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    theta = theta - lr * m_hat / (np.sqrt(v_hat) + eps)
    return theta, AdamState(m, v, t)


@dataclass
class SynthDataset:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    shards: list  # per-worker index arrays into the training set
    means: np.ndarray


def synth_dataset(n_classes=4, d_in=32, n_train=2048, n_test=1024, n_workers=4,
                  class_sep=3.0, cluster_std=1.0, seed=0):
    """Gaussian mixture with uniformly drawn labels and a stratified split.

    Training samples are dealt into ``n_workers`` disjoint, equal shards; any
    remainder is dropped.
    """
    if n_classes < 2:
        raise ConfigurationError(f"n_classes={n_classes} must be >= 2", ("n_classes",))
    if not cluster_std > 0:
        raise ConfigurationError(f"cluster_std={cluster_std} must be positive", ("cluster_std",))
    if n_workers < 1 or n_train < n_workers:
        raise ConfigurationError("need at least one training sample per worker", ("n_train", "workers"))
    rng = np.random.default_rng(seed)
    means = rng.normal(size=(n_classes, d_in))
    means *= class_sep / np.linalg.norm(means, axis=1, keepdims=True)

    total = n_train + n_test
    labels = rng.integers(0, n_classes, size=total)
    X = means[labels] + cluster_std * rng.normal(size=(total, d_in))

    # stratified split: per-class test quotas by largest remainder, summing to n_test
    counts = np.bincount(labels, minlength=n_classes)
    share = counts * (n_test / total)
    quota = np.floor(share).astype(np.int64)
    extra = n_test - int(quota.sum())
    quota[np.lexsort((np.arange(n_classes), -(share - quota)))[:extra]] += 1
    test_mask = np.zeros(total, dtype=bool)
    for c in range(n_classes):
        members = np.flatnonzero(labels == c)
        members = members[rng.permutation(members.size)]
        test_mask[members[:quota[c]]] = True
    train_idx = np.flatnonzero(~test_mask)
    test_idx = np.flatnonzero(test_mask)

    per = train_idx.size // n_workers
    order = rng.permutation(train_idx.size)
    shards = [np.sort(order[w * per:(w + 1) * per]) for w in range(n_workers)]
    return SynthDataset(X[train_idx], labels[train_idx], X[test_idx], labels[test_idx],
                        shards, means)
