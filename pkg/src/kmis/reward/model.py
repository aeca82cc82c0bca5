"""Direct-method reward regressor: fitting, prediction and persistence.

The network sees standardized ``(state, action)`` rows and a standardized
reward; :class:`RewardScaler` carries the training-split statistics and undoes
them at prediction time. Prediction always runs the deterministic network
(dropout off), so a fitted :class:`RewardModel` is safe to share across threads.

Dependencies: errors, reward.config, reward.network, policies.dataset
Wired in: reward/hessian.py, reward/selection.py, reward/direct.py,
    estimators/kmis.py, bandwidth/plugin.py, harness/runner.py, cli.py
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Final, Literal, Protocol

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from kmis.errors import InvalidInputError, ModelStateError, TrainingDivergedError
from kmis.numerics.types import FloatArray
from kmis.policies.dataset import LoggedDataset
from kmis.reward.config import RewardModelConfig
from kmis.reward.network import Adam, GaussianMLP, gaussian_nll, nll_gradients

_log = logging.getLogger(__name__)

MIN_FIT_SAMPLES: Final[int] = 10
_MIN_SCALE: Final[float] = 1e-12
BLOB_VERSION: Final[int] = 1


class RewardRegressor(Protocol):
    """Anything that predicts the conditional reward mean and second moment in batch."""

    @property
    def action_dim(self) -> int: ...

    def predict_mean_batch(self, states: FloatArray, actions: FloatArray) -> FloatArray: ...

    def predict_second_moment_batch(
        self, states: FloatArray, actions: FloatArray
    ) -> FloatArray: ...


@dataclass(frozen=True, eq=False)
class RewardScaler:
    """Training-split standardization of inputs and rewards."""

    state_dim: int
    input_mean: FloatArray
    input_scale: FloatArray
    reward_mean: float
    reward_scale: float

    @classmethod
    def from_training(cls, inputs: FloatArray, rewards: FloatArray, state_dim: int) -> RewardScaler:
        scale = inputs.std(axis=0)
        reward_scale = float(rewards.std())
        return cls(
            state_dim=state_dim,
            input_mean=inputs.mean(axis=0),
            input_scale=np.where(scale < _MIN_SCALE, 1.0, scale),
            reward_mean=float(rewards.mean()),
            reward_scale=reward_scale if reward_scale >= _MIN_SCALE else 1.0,
        )

    @classmethod
    def identity(cls, state_dim: int, action_dim: int) -> RewardScaler:
        width = state_dim + action_dim
        return cls(state_dim, np.zeros(width), np.ones(width), 0.0, 1.0)

    def inputs(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        return (np.column_stack([states, actions]) - self.input_mean) / self.input_scale

    def rewards(self, rewards: FloatArray) -> FloatArray:
        return (rewards - self.reward_mean) / self.reward_scale


class FitReport(BaseModel):
    """Outcome of one training run."""

    model_config = ConfigDict(frozen=True)

    epochs_run: int
    best_epoch: int
    best_validation_nll: float
    initial_validation_nll: float
    n_train: int
    n_validation: int
    seed: int
    validation_history: list[float] = Field(default_factory=list[float])


class RewardModel:
    """Gaussian-head regressor of ``r`` given ``(s, a)``.

    Construct unfitted with a config, or obtain a fitted one from :func:`fit`
    or :func:`load_reward_model`. Every prediction on an unfitted model raises
    :class:`~kmis.errors.ModelStateError`.
    """

    def __init__(
        self,
        config: RewardModelConfig | None = None,
        *,
        network: GaussianMLP | None = None,
        scaler: RewardScaler | None = None,
    ) -> None:
        if (network is None) != (scaler is None):
            raise InvalidInputError("network and scaler must be given together")
        self.config = config or RewardModelConfig()
        self._network = network
        self._scaler = scaler

    @property
    def fitted(self) -> bool:
        return self._network is not None

    def _parts(self) -> tuple[GaussianMLP, RewardScaler]:
        if self._network is None or self._scaler is None:
            raise ModelStateError("Reward model has not been fitted")
        return self._network, self._scaler

    @property
    def network(self) -> GaussianMLP:
        return self._parts()[0]

    @property
    def scaler(self) -> RewardScaler:
        return self._parts()[1]

    @property
    def state_dim(self) -> int:
        return self._parts()[1].state_dim

    @property
    def action_dim(self) -> int:
        network, scaler = self._parts()
        return network.input_dim - scaler.state_dim

    def _head(self, states: FloatArray, actions: FloatArray) -> tuple[FloatArray, FloatArray]:
        network, scaler = self._parts()
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        if states.shape[1] != scaler.state_dim or actions.shape[1] != self.action_dim:
            raise InvalidInputError(
                f"Expected state/action widths {scaler.state_dim}/{self.action_dim}, "
                f"got {states.shape[1]}/{actions.shape[1]}"
            )
        mean, logvar, _ = network.forward(scaler.inputs(states, actions))
        return mean, logvar

    def predict_mean_batch(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        mean, _ = self._head(states, actions)
        scaler = self.scaler
        return scaler.reward_mean + scaler.reward_scale * mean

    def predict_variance_batch(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        _, logvar = self._head(states, actions)
        return self.scaler.reward_scale**2 * np.exp(logvar)

    def predict_second_moment_batch(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        mean, logvar = self._head(states, actions)
        scaler = self.scaler
        mu = scaler.reward_mean + scaler.reward_scale * mean
        return mu * mu + scaler.reward_scale**2 * np.exp(logvar)

    def mean_action_gradient_batch(self, states: FloatArray, actions: FloatArray) -> FloatArray:
        """Backpropagated gradient of the predicted mean with respect to the action."""
        network, scaler = self._parts()
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        _, _, cache = network.forward(scaler.inputs(states, actions))
        n = states.shape[0]
        _, input_grad = network.backward(cache, np.ones(n), np.zeros(n))
        action_cols = slice(scaler.state_dim, None)
        return scaler.reward_scale * input_grad[:, action_cols] / scaler.input_scale[action_cols]


def _point(values: npt.ArrayLike) -> FloatArray:
    return np.asarray(values, dtype=np.float64).reshape(1, -1)


def predict_mean(model: RewardRegressor, s: npt.ArrayLike, a: npt.ArrayLike) -> float:
    """Predicted ``E[r | s, a]`` at one point."""
    return float(model.predict_mean_batch(_point(s), _point(a))[0])


def predict_second_moment(model: RewardRegressor, s: npt.ArrayLike, a: npt.ArrayLike) -> float:
    """Predicted ``E[r^2 | s, a]`` (mean squared plus variance) at one point."""
    return float(model.predict_second_moment_batch(_point(s), _point(a))[0])


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def _validation_nll(
    network: GaussianMLP, inputs: FloatArray, targets: FloatArray, log_scale: float
) -> float:
    mean, logvar, _ = network.forward(inputs)
    return float(np.mean(gaussian_nll(targets, mean, logvar))) + log_scale


def _train_epoch(
    network: GaussianMLP,
    optimizer: Adam,
    inputs: FloatArray,
    targets: FloatArray,
    config: RewardModelConfig,
    rng: np.random.Generator,
    epoch: int,
) -> None:
    order = rng.permutation(inputs.shape[0])
    n_hidden = network.n_hidden
    for start in range(0, order.shape[0], config.batch_size):
        batch = order[start : start + config.batch_size]
        mean, logvar, cache = network.forward(inputs[batch], dropout=config.dropout, rng=rng)
        loss = float(np.mean(gaussian_nll(targets[batch], mean, logvar)))
        if config.l2 > 0.0:
            loss += config.l2 * sum(float(np.sum(w * w)) for w in network.hidden_weights())
        if not math.isfinite(loss):
            raise TrainingDivergedError(epoch)
        grad_mean, grad_logvar = nll_gradients(targets[batch], mean, logvar)
        grads, _ = network.backward(cache, grad_mean, grad_logvar)
        if config.l2 > 0.0:
            for k in range(n_hidden):
                grads[2 * k] = grads[2 * k] + 2.0 * config.l2 * network.params[2 * k]
        optimizer.step(network.params, grads)


def fit(
    data: LoggedDataset, config: RewardModelConfig | None = None, seed: int = 0
) -> tuple[RewardModel, FitReport]:
    """Fit the regressor by mini-batch Adam on the Gaussian negative log-likelihood.

    A random ``validation_fraction`` of records is held out; training stops once
    the validation NLL has not improved for ``patience`` epochs and the weights
    with the lowest recorded validation NLL (epoch 0 included) are kept.

    Raises:
        InvalidInputError: Fewer than ten records.
        TrainingDivergedError: The training loss became non-finite.
    """
    config = config or RewardModelConfig()
    if data.n < MIN_FIT_SAMPLES:
        raise InvalidInputError(f"Reward model fit needs N >= {MIN_FIT_SAMPLES}, got {data.n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(data.n)
    n_validation = max(1, round(data.n * config.validation_fraction))
    val_idx, train_idx = perm[:n_validation], perm[n_validation:]

    raw_inputs = np.column_stack([data.states, data.actions])
    scaler = RewardScaler.from_training(
        raw_inputs[train_idx], data.rewards[train_idx], data.state_dim
    )
    inputs = scaler.inputs(data.states, data.actions)
    targets = scaler.rewards(data.rewards)
    log_scale = math.log(scaler.reward_scale)

    network = GaussianMLP.initialize(inputs.shape[1], config.hidden_sizes, rng)
    optimizer = Adam(learning_rate=config.learning_rate)
    initial = _validation_nll(network, inputs[val_idx], targets[val_idx], log_scale)
    history = [initial]
    best_nll, best_epoch, best_params = initial, 0, network.copy_params()
    stale = 0
    epochs_run = 0
    for epoch in range(1, config.max_epochs + 1):
        _train_epoch(network, optimizer, inputs[train_idx], targets[train_idx], config, rng, epoch)
        epochs_run = epoch
        current = _validation_nll(network, inputs[val_idx], targets[val_idx], log_scale)
        if not math.isfinite(current):
            raise TrainingDivergedError(epoch)
        history.append(current)
        _log.debug("epoch %d validation NLL %.6f", epoch, current)
        if current < best_nll:
            best_nll, best_epoch, best_params = current, epoch, network.copy_params()
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break

    network.params = best_params
    report = FitReport(
        epochs_run=epochs_run,
        best_epoch=best_epoch,
        best_validation_nll=best_nll,
        initial_validation_nll=initial,
        n_train=int(train_idx.shape[0]),
        n_validation=n_validation,
        seed=seed,
        validation_history=history,
    )
    _log.info(
        "Reward model fit: %d epochs, best validation NLL %.4f at epoch %d",
        epochs_run,
        best_nll,
        best_epoch,
    )
    return RewardModel(config, network=network, scaler=scaler), report


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


class _Tensor(BaseModel):
    shape: list[int]
    values: list[float]


class RewardModelBlob(BaseModel):
    """JSON wire form of a fitted model; floats round-trip exactly."""

    format: Literal["kmis-reward-model"] = "kmis-reward-model"
    version: int = BLOB_VERSION
    config: dict[str, object]
    state_dim: int
    input_mean: list[float]
    input_scale: list[float]
    reward_mean: float
    reward_scale: float
    params: list[_Tensor]


def save_reward_model(model: RewardModel, path: Path) -> Path:
    network, scaler = model.network, model.scaler
    blob = RewardModelBlob(
        config=model.config.to_dict(),
        state_dim=scaler.state_dim,
        input_mean=scaler.input_mean.tolist(),
        input_scale=scaler.input_scale.tolist(),
        reward_mean=scaler.reward_mean,
        reward_scale=scaler.reward_scale,
        params=[_Tensor(shape=list(p.shape), values=p.ravel().tolist()) for p in network.params],
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(blob.model_dump_json(indent=2), encoding="utf-8")
    _log.info("Wrote reward model to %s", path)
    return path


def load_reward_model(path: Path) -> RewardModel:
    """Inverse of :func:`save_reward_model`."""
    blob = RewardModelBlob.model_validate(json.loads(path.read_text(encoding="utf-8")))
    if blob.version != BLOB_VERSION:
        raise InvalidInputError(f"{path}: unsupported reward model version {blob.version}")
    params = [np.asarray(t.values, dtype=np.float64).reshape(t.shape) for t in blob.params]
    scaler = RewardScaler(
        state_dim=blob.state_dim,
        input_mean=np.asarray(blob.input_mean, dtype=np.float64),
        input_scale=np.asarray(blob.input_scale, dtype=np.float64),
        reward_mean=blob.reward_mean,
        reward_scale=blob.reward_scale,
    )
    config = RewardModelConfig.from_dict(dict(blob.config))
    return RewardModel(config, network=GaussianMLP(params=params), scaler=scaler)
