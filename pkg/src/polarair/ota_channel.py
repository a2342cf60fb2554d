"""Mean-removal power control, AWGN multiple-access channel, PS preprocessing."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNormalizerError


@dataclass(frozen=True)
class ChannelFrame:
    """One worker's transmission ``[sqrt(a), sqrt(a) mu, sqrt(a) (g - mu)]``."""

    symbols: np.ndarray
    scale: float  # a
    mean: float  # mu

    @property
    def power(self):
        return float(self.symbols @ self.symbols) / self.symbols.size


@dataclass(frozen=True)
class ChannelOutput:
    y: np.ndarray
    noise_std: float


def power_encode(g_cs, P):
    g_cs = np.asarray(g_cs, dtype=np.float64)
    m = g_cs.size
    if m < 1:
        raise ValueError("empty measurement vector")
    if not P > 0:
        raise ValueError(f"power P={P} must be positive")
    mu = float(np.mean(g_cs))
    centred = g_cs - mu
    # 1 + mu^2 + ||g - mu 1||^2 == 1 + ||g||^2 - (m - 1) mu^2
    a = P * (m + 2) / (1.0 + mu * mu + float(centred @ centred))
    root = np.sqrt(a)
    symbols = np.concatenate([[root, root * mu], root * centred])
    return ChannelFrame(symbols, a, mu)


def mac_transmit(frames, noise_std, rng):
    """Superpose the frames (ascending worker order) and add N(0, noise_std^2)."""
    if not frames:
        raise ValueError("no frames to transmit")
    length = frames[0].symbols.size
    if any(f.symbols.size != length for f in frames):
        raise ValueError("all frames must have the same length")
    if noise_std < 0:
        raise ValueError(f"noise_std={noise_std} must be >= 0")
    y = np.zeros(length)
    for f in frames:
        y += f.symbols
    if noise_std > 0:
        y += noise_std * rng.standard_normal(length)
    return ChannelOutput(y, float(noise_std))


def ps_preprocess(output, eps=1e-12):
    """``(y[2:] + y[1]) / y[0]``: undo the power control on the superposed signal."""
    y = output.y if isinstance(output, ChannelOutput) else np.asarray(output, dtype=np.float64)
    if y.size < 3:
        raise ValueError("channel output shorter than the two control symbols plus data")
    if abs(y[0]) < eps:
        raise DegenerateNormalizerError(f"|y_1| = {abs(y[0]):.3g} below {eps:g}")
    return (y[2:] + y[1]) / y[0]


def channel_uses(m):
    return m + 2
