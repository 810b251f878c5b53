"""Intrinsic plasticity: unsupervised pre-training of per-neuron gain and bias.

The online rule nudges each neuron's tanh output distribution toward a target
Gaussian (it descends the KL divergence between the empirical activation
distribution and N(mean, std^2)). Layers adapt one at a time in topological
order; once a layer is done its parameters freeze and its adapted output
series becomes the input for the next layer.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

from .reservoir import HyperParameters, IpConfig, ReservoirWeights


def ip_update(activated, state, gain, cfg: IpConfig):
    """Gain/bias increments for one neuron (or vectorized over a layer).

    ``activated`` is the tanh output, ``state`` the leak-mixed state. Pure
    function of its arguments.
    """
    gain = np.asarray(gain, dtype=float)
    if np.any(gain == 0.0):
        raise ValueError("gain must be nonzero")
    x = np.asarray(activated, dtype=float)
    mean, var = cfg.target_mean, cfg.target_std**2
    d_bias = -(cfg.learning_rate / var) * (-mean + x * (2.0 * var + 1.0 - x**2 + mean * x))
    d_gain = cfg.learning_rate / gain + d_bias * np.asarray(state, dtype=float)
    return d_bias, d_gain


def _adapt_layer(weights, l, input_series, leak, cfg, washout):
    """Adapt one reservoir's gain/bias online over several passes.

    ``input_series`` holds the (already adapted, frozen) source outputs per
    sequence; the layer's own state re-evolves each pass because the updates
    change its dynamics mid-sequence.
    """
    if l in weights.topology.input_fed:
        w = weights.input_block(l).T
    else:
        w = weights.feedforward[l]
    rec = weights.recurrent[l]
    gain = weights.gain[l].copy()
    bias = weights.bias[l].copy()
    for _ in range(cfg.epochs):
        for series in input_series:
            state = np.zeros(weights.n_reservoir)
            for t in range(series.shape[0]):
                drive = w @ series[t] + rec @ state
                activated = np.tanh(gain * drive + bias)
                state = (1.0 - leak) * state + leak * activated
                if t >= washout:
                    d_bias, d_gain = ip_update(activated, state, gain, cfg)
                    bias = bias + d_bias
                    gain = gain + d_gain
    return gain, bias


def _layer_outputs(weights, l, input_series, leak, gain, bias):
    """Frozen-parameter state series of one layer for each input sequence."""
    if l in weights.topology.input_fed:
        w = weights.input_block(l).T
    else:
        w = weights.feedforward[l]
    rec = weights.recurrent[l]
    outputs = []
    for series in input_series:
        states = np.empty((series.shape[0], weights.n_reservoir))
        state = np.zeros(weights.n_reservoir)
        for t in range(series.shape[0]):
            activated = np.tanh(gain * (w @ series[t] + rec @ state) + bias)
            state = (1.0 - leak) * state + leak * activated
            states[t] = state
        outputs.append(states)
    return outputs


def ip_pretrain(
    weights: ReservoirWeights,
    train_inputs: list[np.ndarray],
    hp: HyperParameters,
    washout: int = 0,
) -> ReservoirWeights:
    """Layer-wise intrinsic-plasticity pre-training over the training inputs.

    Returns new weights with adapted gains and biases; every other matrix is
    untouched. ``hp.ip.epochs = 0`` returns the weights unchanged. Washout
    timesteps drive the state but contribute no updates.
    """
    cfg = hp.ip
    if cfg.epochs == 0:
        return weights
    train_inputs = [np.atleast_2d(np.asarray(u, dtype=float)) for u in train_inputs]

    topo = weights.topology
    gains = [g.copy() for g in weights.gain]
    biases = [b.copy() for b in weights.bias]
    # adapted output series per reservoir, grown in topological order
    outputs: dict[int, list[np.ndarray]] = {}
    for l in topo.order:
        if l in topo.input_fed:
            series = train_inputs
        else:
            srcs = topo.sources_of(l)
            if len(srcs) == 1:
                series = outputs[srcs[0]]
            else:
                series = [np.hstack([outputs[s][i] for s in srcs]) for i in range(len(train_inputs))]
        gains[l], biases[l] = _adapt_layer(weights, l, series, hp.leak, cfg, washout)
        outputs[l] = _layer_outputs(weights, l, series, hp.leak, gains[l], biases[l])
    return weights.with_plasticity(gains, biases)


def kl_estimate(samples, mean: float, std: float, bins: int = 64) -> float:
    """KL divergence of an empirical sample against N(mean, std^2) on [-1, 1].

    Histogram density over 64 bins; the Gaussian is restricted to [-1, 1] and
    renormalized. Used as the before/after yardstick for pre-training.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < 100:
        raise ValueError("need at least 100 samples")
    edges = np.linspace(-1.0, 1.0, bins + 1)
    counts, _ = np.histogram(np.clip(samples, -1.0, 1.0), bins=edges)
    p = counts / counts.sum()
    cdf = norm.cdf((edges - mean) / std)
    q = np.diff(cdf)
    q = q / (cdf[-1] - cdf[0])
    q = np.maximum(q, 1e-300)
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / q[nz])))
