"""Deep Cox model: a feed-forward network whose single output is the log-risk.

Architecture: hidden blocks Linear -> [BatchNorm] -> ReLU -> Dropout, then a
one-node Linear output. Training is full-batch SGD with classical momentum on
the negative Breslow log partial likelihood plus an L2 penalty on the weight
matrices. The likelihood gradient w.r.t. the outputs comes from
`waitsurv.survival.core.nll_gradient`; torch backpropagates it through the
network. Everything runs in float64 on the CPU.

Randomness never touches torch's global generator: initialization and dropout
masks use explicit `torch.Generator`s seeded from `NetworkConfig.seed`.
"""

from __future__ import annotations

import copy
import json
import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Literal, Optional, Tuple

import numpy as np
import torch
from torch import nn

from waitsurv.config.models import NetworkConfig
from waitsurv.domain.errors import (
    ArtifactError,
    DimensionMismatchError,
    NoComparablePairsError,
    NonFiniteActivationError,
    TrainingDivergedError,
)
from waitsurv.domain.models import RiskScores, SurvivalDataset
from waitsurv.infrastructure.artifacts import read_npz, write_npz
from waitsurv.survival import core
from waitsurv.survival.concordance import c_index

logger = logging.getLogger(__name__)

NETWORK_FORMAT_VERSION = 1
BN_MOMENTUM = 0.9
BN_EPSILON = 1e-5

Mode = Literal["train", "eval"]


def _seed_streams(seed: int) -> Tuple[int, int]:
    """Independent (init, dropout) seeds derived from one network seed."""
    init_seq, dropout_seq = np.random.SeedSequence(seed).spawn(2)
    return int(init_seq.generate_state(1)[0]), int(dropout_seq.generate_state(1)[0])


def dropout_generator(seed: int) -> torch.Generator:
    """Generator for dropout masks, derived from the network seed."""
    return torch.Generator().manual_seed(_seed_streams(seed)[1])


class RiskNetwork(nn.Module):
    """Fully connected log-risk network (float64)."""

    def __init__(self, config: NetworkConfig):
        super().__init__()
        sizes = config.layer_sizes
        self.config = config
        self.hidden = nn.ModuleList(
            nn.Linear(fan_in, fan_out) for fan_in, fan_out in zip(sizes[:-2], sizes[1:-1])
        )
        # torch momentum weighs the new batch statistic.
        self.norms = nn.ModuleList(
            nn.BatchNorm1d(width, eps=BN_EPSILON, momentum=1.0 - BN_MOMENTUM)
            for width in (sizes[1:-1] if config.batch_norm else [])
        )
        self.output = nn.Linear(sizes[-2], 1)
        self.double()

    @property
    def n_inputs(self) -> int:
        return self.hidden[0].in_features

    def forward(self, x: torch.Tensor, generator: Optional[torch.Generator] = None) -> torch.Tensor:
        rate = self.config.dropout_rate
        activation = x
        for index, layer in enumerate(self.hidden):
            z = layer(activation)
            if self.config.batch_norm:
                z = self.norms[index](z)
            activation = torch.relu(z)
            if self.training and rate > 0:
                keep = 1.0 - rate
                mask = torch.bernoulli(torch.full_like(activation, keep), generator=generator)
                activation = activation * mask / keep
            if not torch.isfinite(activation).all():
                raise NonFiniteActivationError(index + 1)
        out = self.output(activation).squeeze(-1)
        if not torch.isfinite(out).all():
            raise NonFiniteActivationError(len(self.hidden) + 1)
        return out

    def weight_matrices(self) -> List[torch.Tensor]:
        """Linear weights (the L2-penalized parameters)."""
        return [layer.weight for layer in self.hidden] + [self.output.weight]

    def count_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())


@dataclass
class TrainingResult:
    network: RiskNetwork
    loss_trace: np.ndarray
    validation_trace: List[float] = field(default_factory=list)
    best_epoch: Optional[int] = None


def init_network(config: NetworkConfig) -> RiskNetwork:
    """Glorot-uniform weights, zero biases; BatchNorm scale 1, shift 0."""
    net = RiskNetwork(config)
    generator = torch.Generator().manual_seed(_seed_streams(config.seed)[0])
    with torch.no_grad():
        for layer in [*net.hidden, net.output]:
            bound = math.sqrt(6.0 / (layer.in_features + layer.out_features))
            layer.weight.uniform_(-bound, bound, generator=generator)
            layer.bias.zero_()
    return net


def _as_tensor(net: RiskNetwork, features: np.ndarray | SurvivalDataset) -> torch.Tensor:
    matrix = features.features if isinstance(features, SurvivalDataset) else features
    matrix = np.array(matrix, dtype=np.float64, copy=True)
    if matrix.ndim != 2 or matrix.shape[1] != net.n_inputs:
        raise DimensionMismatchError(
            f"network expects {net.n_inputs} input features, got shape {matrix.shape}"
        )
    return torch.from_numpy(matrix)


@contextmanager
def _preserved_running_stats(net: RiskNetwork) -> Iterator[None]:
    saved = [copy.deepcopy(norm.state_dict()) for norm in net.norms]
    try:
        yield
    finally:
        for norm, state in zip(net.norms, saved):
            norm.load_state_dict(state)


def forward(
    net: RiskNetwork,
    features: np.ndarray | SurvivalDataset,
    mode: Mode = "eval",
    generator: Optional[torch.Generator] = None,
) -> RiskScores:
    """Log-risk scores without touching the network's state.

    Train mode applies inverted dropout (masks from `generator`) and batch
    statistics; eval mode uses no masks and the running statistics.
    """
    x = _as_tensor(net, features)
    was_training = net.training
    with torch.no_grad(), _preserved_running_stats(net):
        net.train(mode == "train")
        try:
            out = net(x, generator=generator)
        finally:
            net.train(was_training)
    return RiskScores(out.numpy().copy())


def predict(net: RiskNetwork, features: np.ndarray | SurvivalDataset) -> RiskScores:
    return forward(net, features, mode="eval")


def _l2_penalty(net: RiskNetwork) -> float:
    return float(sum(torch.sum(w.detach() ** 2) for w in net.weight_matrices()))


def loss_and_gradients(
    net: RiskNetwork,
    dataset: SurvivalDataset,
    l2_coefficient: Optional[float] = None,
    mode: Mode = "train",
    generator: Optional[torch.Generator] = None,
) -> Tuple[float, Dict[str, np.ndarray]]:
    """Total loss and its gradient for every named parameter.

    In train mode the network's BatchNorm running statistics are updated as a
    side effect, exactly like one training step.
    """
    l2 = net.config.l2_coefficient if l2_coefficient is None else l2_coefficient
    net.train(mode == "train")
    loss = _backward(net, dataset, l2, generator)
    gradients = {
        name: parameter.grad.detach().numpy().copy()
        for name, parameter in net.named_parameters()
    }
    net.zero_grad(set_to_none=True)
    return loss, gradients


def get_parameters(net: RiskNetwork) -> Dict[str, np.ndarray]:
    return {name: p.detach().numpy().copy() for name, p in net.named_parameters()}


def set_parameters(net: RiskNetwork, values: Dict[str, np.ndarray]) -> None:
    with torch.no_grad():
        for name, parameter in net.named_parameters():
            if name in values:
                parameter.copy_(torch.from_numpy(np.asarray(values[name], dtype=np.float64)))


def train(
    net: RiskNetwork,
    dataset: SurvivalDataset,
    config: Optional[NetworkConfig] = None,
    validation: Optional[SurvivalDataset] = None,
) -> TrainingResult:
    """Full-batch SGD with momentum and exponential learning-rate decay.

    Update per epoch e: lr_e = lr_0 * exp(-decay * e); v = mu * v - lr_e * g;
    theta = theta + v. The loss trace holds the loss before each update. With a
    validation set, the returned network is the snapshot with the best
    validation C-index (earliest on ties); otherwise the final parameters.

    Raises:
        NoEventsError: If the training data has no events.
        TrainingDivergedError: If the loss or any parameter becomes non-finite.
    """
    config = config or net.config
    dataset.require_events()
    net = copy.deepcopy(net)
    generator = dropout_generator(config.seed)
    velocity = [torch.zeros_like(p) for p in net.parameters()]
    losses = np.empty(config.epochs, dtype=np.float64)
    validation_trace: List[float] = []
    best_state = None
    best_epoch: Optional[int] = None
    best_score = -np.inf

    for epoch in range(config.epochs):
        lr = config.learning_rate * math.exp(-config.lr_decay * epoch)
        net.train()
        try:
            loss = _backward(net, dataset, config.l2_coefficient, generator)
        except NonFiniteActivationError as exc:
            raise TrainingDivergedError(epoch + 1, float("nan")) from exc
        if not math.isfinite(loss):
            raise TrainingDivergedError(epoch + 1, loss)
        losses[epoch] = loss

        with torch.no_grad():
            for parameter, v in zip(net.parameters(), velocity):
                v.mul_(config.momentum).sub_(lr * parameter.grad)
                parameter.add_(v)
                if not torch.isfinite(parameter).all():
                    raise TrainingDivergedError(epoch + 1, loss)
        net.zero_grad(set_to_none=True)

        if validation is not None:
            try:
                score = c_index(validation.durations, validation.events, predict(net, validation))
            except NoComparablePairsError:
                score = float("nan")
            validation_trace.append(score)
            if score > best_score:
                best_score = score
                best_epoch = epoch + 1
                best_state = copy.deepcopy(net.state_dict())

        if epoch % 50 == 0 or epoch == config.epochs - 1:
            logger.debug("epoch %d/%d: loss=%.6f lr=%.3e", epoch + 1, config.epochs, loss, lr)

    if best_state is not None:
        net.load_state_dict(best_state)
    elif validation is not None:
        logger.warning("Validation split had no comparable pairs; keeping final parameters")
    net.eval()
    return TrainingResult(
        network=net,
        loss_trace=losses,
        validation_trace=validation_trace,
        best_epoch=best_epoch,
    )


def _backward(
    net: RiskNetwork,
    dataset: SurvivalDataset,
    l2: float,
    generator: Optional[torch.Generator],
) -> float:
    """Forward/backward in the network's current mode; leaves penalized gradients in `.grad`."""
    x = _as_tensor(net, dataset)
    net.zero_grad(set_to_none=True)
    out = net(x, generator=generator)
    scores = out.detach().numpy()
    loss = core.neg_log_partial_likelihood(dataset, scores) + l2 * _l2_penalty(net)
    out.backward(torch.from_numpy(core.nll_gradient(dataset, scores)))
    with torch.no_grad():
        for weight in net.weight_matrices():
            weight.grad.add_(weight, alpha=2.0 * l2)
        for parameter in net.parameters():
            if parameter.grad is None:
                parameter.grad = torch.zeros_like(parameter)
    return loss


def save_network(net: RiskNetwork, path: Path) -> None:
    """Write config, parameters and BatchNorm statistics to a versioned .npz."""
    arrays = {
        "format_version": np.array(NETWORK_FORMAT_VERSION, dtype=np.int64),
        "config": np.array(json.dumps(net.config.model_dump(), sort_keys=True)),
    }
    for name, tensor in net.state_dict().items():
        arrays[f"state.{name}"] = tensor.detach().cpu().numpy()
    write_npz(path, arrays)


def load_network(path: Path) -> RiskNetwork:
    """Inverse of `save_network`; eval-mode outputs match the saved network exactly.

    Raises:
        ArtifactError: If the file is missing, has another format version, or
            does not match its recorded configuration.
    """
    arrays = read_npz(path)
    version = int(arrays.get("format_version", -1))
    if version != NETWORK_FORMAT_VERSION:
        raise ArtifactError(
            f"{path}: network format version {version} is not supported "
            f"(expected {NETWORK_FORMAT_VERSION})"
        )
    try:
        config = NetworkConfig.model_validate(json.loads(str(arrays["config"])))
        net = RiskNetwork(config)
        state = {
            key[len("state."):]: torch.from_numpy(np.array(value))
            for key, value in arrays.items()
            if key.startswith("state.")
        }
        net.load_state_dict(state, strict=True)
    except (KeyError, ValueError, RuntimeError) as exc:
        raise ArtifactError(f"{path}: invalid network file: {exc}") from exc
    net.eval()
    return net
