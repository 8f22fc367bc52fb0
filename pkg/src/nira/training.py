"""Mini-batch Adam trainer with manual backpropagation.

Networks are tiny, so the whole loop is plain numpy: forward pass storing
pre-activations, hand-written gradients for sine / ReLU / ELU, Adam moment
estimates per parameter. Deterministic given the seed.

The SIREN frequency scale omega0 is applied at initialization and folded
into the first-layer weights, so the trained (and stored) network uses plain
``sin``. Coordinates are the normalized [-1, 1] grid; values are min-max
normalized to [-1, 1] and restored through value_scale / value_offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, TrainingDivergedError
from .inr import ActivationKind, LinearLayer, MlpNetwork, ScalarVolume

PSNR_SENTINEL = 999.0


@dataclass(frozen=True)
class TrainConfig:
    width: int = 32
    depth: int = 8                 # number of linear layers
    activation: ActivationKind = ActivationKind.SINE
    epochs: int = 300
    learning_rate: float = 3e-4
    seed: int = 0
    batch_size: int = 16384
    omega0: float = 30.0
    # step decay keeps late epochs from oscillating around the optimum
    decay_at: tuple[float, ...] = (0.6, 0.85)
    decay_factor: float = 0.5

    def __post_init__(self):
        if self.width < 2 or self.depth < 1:
            raise ContractViolationError("width must be >= 2 and depth >= 1")
        if self.epochs < 1 or self.batch_size < 1:
            raise ContractViolationError("epochs and batch_size must be >= 1")


@dataclass(frozen=True)
class TrainReport:
    final_rmse: float      # data units
    psnr: float
    epochs: int
    final_loss: float      # normalized-space MSE


def _init_layers(cfg: TrainConfig, in_dim: int, rng: np.random.Generator):
    dims = [in_dim] + [cfg.width] * (cfg.depth - 1) + [1]
    weights, biases = [], []
    for l in range(cfg.depth):
        fan_in, fan_out = dims[l], dims[l + 1]
        if cfg.activation is ActivationKind.SINE:
            if l == 0:
                w_lim = cfg.omega0 / fan_in
                b_lim = cfg.omega0 / math.sqrt(fan_in)
            elif l < cfg.depth - 1:
                # sqrt(6/fan)/omega0 scaled back up by the folded omega0
                w_lim = math.sqrt(6.0 / fan_in)
                b_lim = cfg.omega0 / math.sqrt(fan_in)
            else:
                w_lim = math.sqrt(6.0 / fan_in) / cfg.omega0
                b_lim = 1.0 / math.sqrt(fan_in)
        else:
            w_lim = math.sqrt(6.0 / fan_in)
            b_lim = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-w_lim, w_lim, (fan_out, fan_in)))
        biases.append(rng.uniform(-b_lim, b_lim, fan_out))
    return weights, biases


def _act(kind: ActivationKind, x: np.ndarray) -> np.ndarray:
    if kind is ActivationKind.SINE:
        return np.sin(x)
    if kind is ActivationKind.RELU:
        return np.maximum(x, 0.0)
    return np.where(x > 0.0, x, np.expm1(np.minimum(x, 0.0)))


def _act_grad(kind: ActivationKind, x: np.ndarray) -> np.ndarray:
    if kind is ActivationKind.SINE:
        return np.cos(x)
    if kind is ActivationKind.RELU:
        return (x > 0.0).astype(np.float64)  # derivative at 0 fixed to 0
    return np.where(x > 0.0, 1.0, np.exp(np.minimum(x, 0.0)))


def _grid_coords(dims: tuple[int, int, int]) -> np.ndarray:
    axes = [np.linspace(-1.0, 1.0, n) if n > 1 else np.zeros(1) for n in dims]
    mesh = np.meshgrid(*axes, indexing="ij")
    cols = [m.transpose(2, 1, 0).reshape(-1) for m in mesh]
    return np.column_stack(cols)


def train(volume: ScalarVolume, config: TrainConfig,
          domain_lower=None, domain_upper=None) -> tuple[MlpNetwork, TrainReport]:
    """Fit an MLP to the volume grid by MSE; returns the network and a
    quality report. Raises TrainingDivergedError on non-finite loss."""
    rng = np.random.default_rng(config.seed)
    coords = _grid_coords(volume.dims)
    values = volume.data
    vmin, vmax = float(values.min()), float(values.max())
    scale = 0.5 * (vmax - vmin)
    if scale == 0.0:
        scale = 1.0
    offset = 0.5 * (vmax + vmin)
    targets = (values - offset) / scale

    weights, biases = _init_layers(config, coords.shape[1], rng)
    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    lr = config.learning_rate
    decay_epochs = {int(f * config.epochs) for f in config.decay_at}
    # Training operates on the folded (plain-sin) parameters. Adam steps are
    # gradient-scale invariant, so moving a sine layer's folded weights at
    # omega0 * lr reproduces the dynamics of the conventional unfolded
    # parametrization exactly.
    if config.activation is ActivationKind.SINE:
        lr_scale = [config.omega0 if l < config.depth - 1 else 1.0
                    for l in range(config.depth)]
    else:
        lr_scale = [1.0] * config.depth

    n = coords.shape[0]
    depth = config.depth
    epoch_loss = 0.0
    for epoch in range(config.epochs):
        if epoch in decay_epochs:
            lr *= config.decay_factor
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            x = coords[idx]
            t = targets[idx]
            # forward, keeping pre-activations for the backward pass
            pre = []
            h = x
            for l in range(depth):
                z = h @ weights[l].T + biases[l]
                pre.append(z)
                h = _act(config.activation, z) if l < depth - 1 else z
            resid = h[:, 0] - t
            epoch_loss += float(resid @ resid)
            # backward
            g = (2.0 / idx.size) * resid[:, None]
            for l in range(depth - 1, -1, -1):
                inp = x if l == 0 else _act(config.activation, pre[l - 1])
                grad_w = g.T @ inp
                grad_b = g.sum(axis=0)
                if l > 0:
                    g = (g @ weights[l]) * _act_grad(config.activation, pre[l - 1])
                step_l = step + 1
                for param, grad, mom, vel in ((weights[l], grad_w, m_w[l], v_w[l]),
                                              (biases[l], grad_b, m_b[l], v_b[l])):
                    mom += (1.0 - beta1) * (grad - mom)
                    vel += (1.0 - beta2) * (grad * grad - vel)
                    mhat = mom / (1.0 - beta1 ** step_l)
                    vhat = vel / (1.0 - beta2 ** step_l)
                    param -= lr * lr_scale[l] * mhat / (np.sqrt(vhat) + eps)
            step += 1
        epoch_loss /= n
        if not math.isfinite(epoch_loss):
            raise TrainingDivergedError(epoch)

    # final full-grid evaluation in normalized space
    h = coords
    for l in range(depth):
        z = h @ weights[l].T + biases[l]
        h = _act(config.activation, z) if l < depth - 1 else z
    rmse_norm = float(np.sqrt(np.mean((h[:, 0] - targets) ** 2)))
    rmse_data = rmse_norm * abs(scale)
    vrange = vmax - vmin
    if vrange == 0.0 or rmse_data == 0.0:
        psnr = PSNR_SENTINEL
    else:
        psnr = min(20.0 * math.log10(vrange / rmse_data), PSNR_SENTINEL)

    if domain_lower is None:
        domain_lower = [-1.0, -1.0, -1.0]
    if domain_upper is None:
        domain_upper = [1.0, 1.0, 1.0]
    net = MlpNetwork(
        layers=tuple(LinearLayer(weights=w, bias=b)
                     for w, b in zip(weights, biases)),
        activation=config.activation,
        input_dim=coords.shape[1],
        output_dim=1,
        domain_lower=domain_lower,
        domain_upper=domain_upper,
        value_scale=scale,
        value_offset=offset,
    )
    report = TrainReport(final_rmse=rmse_data, psnr=psnr,
                         epochs=config.epochs, final_loss=epoch_loss)
    return net, report
