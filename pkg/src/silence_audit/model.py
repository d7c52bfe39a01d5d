"""Scalar-input fully connected classifier trained with BCE and Adam.

Architecture: ``x -> Linear(1, H) -> ReLU -> Dropout -> Linear(H, H) -> ReLU
-> Dropout -> Linear(H, 1) -> sigmoid`` with ``H = 128``. The output is the
predicted spoof probability (bonafide = 0, spoof = 1).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

HIDDEN = 128
LOSS_EPS = 1e-7
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
CHECKPOINT_FORMAT = "silence-audit-fcnn"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True, eq=False)
class FcnnParams:
    W1: np.ndarray  # (H, 1)
    b1: np.ndarray  # (H,)
    W2: np.ndarray  # (H, H)
    b2: np.ndarray  # (H,)
    W3: np.ndarray  # (1, H)
    b3: np.ndarray  # ()

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, n) for n in self.names()]

    def map(self, fn: Callable[..., np.ndarray], *others: "FcnnParams") -> "FcnnParams":
        return FcnnParams(*(fn(*xs) for xs in zip(self.arrays(), *(o.arrays() for o in others))))

    def zeros_like(self) -> "FcnnParams":
        return self.map(np.zeros_like)

    @property
    def hidden(self) -> int:
        return self.b1.shape[0]

    def equals(self, other: "FcnnParams") -> bool:
        return all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays()))

    def to_dict(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "layers": [
                {"name": n, "shape": list(a.shape), "data": a.ravel().tolist()}
                for n, a in zip(self.names(), self.arrays())
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FcnnParams":
        if d.get("format") != CHECKPOINT_FORMAT or d.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint {d.get('format')!r} v{d.get('version')!r}")
        layers = {layer["name"]: layer for layer in d["layers"]}
        arrays = []
        for name in cls.names():
            layer = layers[name]
            arrays.append(np.asarray(layer["data"], dtype=np.float64).reshape(layer["shape"]))
        params = cls(*arrays)
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("checkpoint contains non-finite weights")
        return params


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    learning_rate: float = 0.001
    weight_decay: float = 1e-6
    dropout: float = 0.10
    batch_size: int = 64
    seed: int = 0
    hidden: int = HIDDEN

    def __post_init__(self):
        if not 0 <= self.dropout < 1:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass(frozen=True, eq=False)
class AdamState:
    m: FcnnParams
    v: FcnnParams
    t: int = 0

    @classmethod
    def zeros(cls, p: FcnnParams) -> "AdamState":
        return cls(p.zeros_like(), p.zeros_like(), 0)


def init(seed: int, hidden: int = HIDDEN) -> FcnnParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    rng = np.random.default_rng(seed)

    def uniform(fan_out, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=(fan_out, fan_in))

    return FcnnParams(
        W1=uniform(hidden, 1),
        b1=np.zeros(hidden),
        W2=uniform(hidden, hidden),
        b2=np.zeros(hidden),
        W3=uniform(1, hidden),
        b3=np.zeros(()),
    )


def sigmoid(z):
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def relu(z):
    return np.maximum(z, 0.0)


def dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray:
    """Inverted-dropout mask: 0 with probability ``rate``, else ``1 / (1 - rate)``."""
    if rate == 0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)


def dropout(h: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    return h * dropout_mask(rng, np.shape(h), rate)


def sample_masks(rng: np.random.Generator, n: int, hidden: int, rate: float):
    return dropout_mask(rng, (n, hidden), rate), dropout_mask(rng, (n, hidden), rate)


def _forward(p: FcnnParams, x: np.ndarray, masks=None):
    z1 = x[:, None] * p.W1[:, 0] + p.b1
    a1 = relu(z1)
    if masks is not None:
        a1 = a1 * masks[0]
    z2 = a1 @ p.W2.T + p.b2
    a2 = relu(z2)
    if masks is not None:
        a2 = a2 * masks[1]
    z3 = a2 @ p.W3[0] + p.b3
    return sigmoid(z3), (z1, a1, z2, a2)


def forward(p: FcnnParams, x, masks=None):
    """Spoof probability for a scalar or 1-D batch of inputs.

    ``masks`` (from :func:`sample_masks`) selects train mode; ``None`` is eval
    mode with dropout disabled.
    """
    scalar = np.ndim(x) == 0
    y, _ = _forward(p, np.atleast_1d(np.asarray(x, dtype=np.float64)), masks)
    return float(y[0]) if scalar else y


def bce_loss(y_hat, y):
    """Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7]."""
    y_hat = np.clip(np.asarray(y_hat, dtype=np.float64), LOSS_EPS, 1 - LOSS_EPS)
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(-(y * np.log(y_hat) + (1 - y) * np.log(1 - y_hat))))


def backward(p: FcnnParams, x, y, masks=None) -> tuple[FcnnParams, float]:
    """Gradients of the mean BCE loss over the batch, and the loss itself.

    ``masks`` must be the ones used in the forward pass being differentiated.
    Samples whose prediction sits inside the loss clamp contribute no gradient.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    n = x.size
    y_hat, (z1, a1, z2, a2) = _forward(p, x, masks)
    loss = bce_loss(y_hat, y)

    inside = (y_hat >= LOSS_EPS) & (y_hat <= 1 - LOSS_EPS)
    dz3 = np.where(inside, y_hat - y, 0.0) / n
    gW3 = (dz3 @ a2)[None, :]
    gb3 = np.asarray(dz3.sum())
    da2 = dz3[:, None] * p.W3[0]
    if masks is not None:
        da2 = da2 * masks[1]
    dz2 = da2 * (z2 > 0)
    gW2 = dz2.T @ a1
    gb2 = dz2.sum(axis=0)
    da1 = dz2 @ p.W2
    if masks is not None:
        da1 = da1 * masks[0]
    dz1 = da1 * (z1 > 0)
    gW1 = (dz1.T @ x)[:, None]
    gb1 = dz1.sum(axis=0)
    return FcnnParams(gW1, gb1, gW2, gb2, gW3, gb3), loss


def adam_step(
    state: AdamState, p: FcnnParams, grads: FcnnParams, cfg: TrainConfig
) -> tuple[AdamState, FcnnParams]:
    """One Adam update with L2 weight decay folded into the gradient."""
    t = state.t + 1
    wd = cfg.weight_decay
    g = grads.map(lambda gi, th: gi + wd * th, p) if wd else grads
    m = state.m.map(lambda mi, gi: ADAM_BETA1 * mi + (1 - ADAM_BETA1) * gi, g)
    v = state.v.map(lambda vi, gi: ADAM_BETA2 * vi + (1 - ADAM_BETA2) * gi * gi, g)
    c1 = 1 - ADAM_BETA1**t
    c2 = 1 - ADAM_BETA2**t
    new_p = p.map(
        lambda th, mi, vi: th - cfg.learning_rate * (mi / c1) / (np.sqrt(vi / c2) + ADAM_EPS), m, v
    )
    return AdamState(m, v, t), new_p


def train(
    xs: Sequence[float],
    ys: Sequence[int],
    cfg: TrainConfig = TrainConfig(),
    resample: Optional[Callable[[int], np.ndarray]] = None,
) -> tuple[FcnnParams, list[float]]:
    """Mini-batch training for ``cfg.epochs`` epochs, no early stopping.

    Args:
        xs: normalized scalar features.
        ys: labels, 0 for bonafide and 1 for spoof.
        cfg: hyperparameters; ``cfg.seed`` fixes init, shuffling and dropout.
        resample: optional ``epoch -> features`` hook returning fresh features
            (same order as ``ys``) for each epoch, e.g. from subselected audio.

    Returns:
        Final parameters and the mean training loss of every epoch.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-D and equally long")
    if not (np.any(y == 0) and np.any(y == 1)):
        raise ValueError("training data must contain both classes")

    init_seq, loop_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    p = init(int(init_seq.generate_state(1)[0]), cfg.hidden)
    rng = np.random.default_rng(loop_seq)
    state = AdamState.zeros(p)
    history = []
    n = x.size
    for epoch in range(cfg.epochs):
        if resample is not None:
            x = np.asarray(resample(epoch), dtype=np.float64)
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            masks = sample_masks(rng, idx.size, p.hidden, cfg.dropout)
            grads, loss = backward(p, x[idx], y[idx], masks)
            state, p = adam_step(state, p, grads, cfg)
            total += loss * idx.size
        history.append(total / n)
        logger.debug("epoch %d loss %.6f", epoch + 1, history[-1])
    return p, history


def score(p: FcnnParams, xs: Sequence[float]) -> np.ndarray:
    """Eval-mode spoof probabilities."""
    return forward(p, np.asarray(xs, dtype=np.float64).reshape(-1))


def random_baseline(n: int, rng: np.random.Generator) -> np.ndarray:
    """Untrained reference scorer: i.i.d. uniform [0, 1] scores."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.uniform(0.0, 1.0, size=n)


def save_checkpoint(path: str | Path, p: FcnnParams, **extra) -> None:
    payload = p.to_dict()
    payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path) -> tuple[FcnnParams, dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return FcnnParams.from_dict(payload), payload

