"""MixMatch on feature vectors with a small from-scratch network.

The pipeline keeps the published recipe at toy scale: K jittered views per
unlabelled item, pseudo-labels from the averaged model output, temperature
sharpening, MixUp of both sets against a shuffled combined pool with the
interpolation coefficient folded above 1/2, and a combined loss of
cross-entropy on the mixed labelled batch plus a ramped unsupervised term
using the plain Euclidean distance between mixed pseudo-labels and model
output.  The ramp min(t/rho, 1) counts optimizer steps and is clamped so a
long run cannot blow the unsupervised weight past gamma.

The model is a two-layer tanh MLP with a softmax head, trained with Adam
(decoupled weight decay) at a fixed learning rate.  Everything is a
deterministic function of (run data, config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .rng import Stream
from .sandbox import RunData


@dataclass(frozen=True)
class MixMatchConfig:
    k: int = 2
    temperature: float = 0.5
    alpha: float = 0.75
    gamma: float = 25.0
    rho: float = 3000.0
    epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 2e-4
    weight_decay: float = 1e-4
    sigma_aug: float = 0.1
    hidden: int = 64

    def __post_init__(self):
        if self.k < 1:
            raise DataError("k must be >= 1")
        if self.temperature <= 0 or self.alpha <= 0 or self.rho <= 0:
            raise DataError("temperature, alpha and rho must be positive")
        if self.gamma < 0:
            raise DataError("gamma must be >= 0")
        if self.epochs < 1 or self.batch_size < 1 or self.hidden < 1:
            raise DataError("epochs, batch_size and hidden must be >= 1")
        if self.learning_rate < 0 or self.weight_decay < 0 or self.sigma_aug < 0:
            raise DataError("learning_rate, weight_decay and sigma_aug must be >= 0")


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"loss became non-finite in epoch {epoch}")
        self.epoch = epoch


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


class ToyModel:
    """input -> tanh(hidden) -> softmax(num_classes), weights seeded."""

    def __init__(self, in_dim: int, num_classes: int, hidden: int, stream: Stream):
        self.in_dim = in_dim
        self.num_classes = num_classes
        self.hidden = hidden
        w = stream.child("w1").normals(in_dim * hidden) / np.sqrt(in_dim)
        self.w1 = w.reshape(in_dim, hidden)
        self.b1 = np.zeros(hidden)
        w = stream.child("w2").normals(hidden * num_classes) / np.sqrt(hidden)
        self.w2 = w.reshape(hidden, num_classes)
        self.b2 = np.zeros(num_classes)

    def params(self) -> dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    def logits(self, x: np.ndarray) -> np.ndarray:
        h = np.tanh(x @ self.w1 + self.b1)
        return h @ self.w2 + self.b2

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.logits(x))

    def _forward_cache(self, x: np.ndarray):
        h = np.tanh(x @ self.w1 + self.b1)
        z = h @ self.w2 + self.b2
        return h, z

    def _backprop(self, x: np.ndarray, h: np.ndarray, dz2: np.ndarray, grads) -> None:
        grads["w2"] += h.T @ dz2
        grads["b2"] += dz2.sum(axis=0)
        dh = (dz2 @ self.w2.T) * (1.0 - h * h)
        grads["w1"] += x.T @ dh
        grads["b1"] += dh.sum(axis=0)


def augment(x: np.ndarray, k: int, stream: Stream, sigma: float) -> np.ndarray:
    """K independently jittered views x + sigma * N(0, I), shape (k, d)."""
    if k < 1:
        raise DataError("k must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    noise = stream.normals(k * x.shape[-1]).reshape(k, x.shape[-1])
    return x[None, :] + sigma * noise


def pseudo_label(model: ToyModel, views: np.ndarray) -> np.ndarray:
    """Mean softmax output over the views of one item."""
    views = np.asarray(views, dtype=np.float64)
    if views.ndim != 2 or views.shape[0] < 1:
        raise DataError("views must be a non-empty (k, d) array")
    return model.predict_proba(views).mean(axis=0)


def sharpen(y: np.ndarray, temperature: float) -> np.ndarray:
    """Power-temperature renormalization; concentrates mass for T < 1."""
    if temperature <= 0:
        raise DataError("temperature must be positive")
    y = np.asarray(y, dtype=np.float64)
    powered = y ** (1.0 / temperature)
    return powered / powered.sum(axis=-1, keepdims=True)


def fold_lambda(lam: float) -> float:
    return max(lam, 1.0 - lam)


def mix_pair(pair_a, pair_b, lam: float):
    """Interpolate two (x, y) pairs at a folded coefficient >= 1/2."""
    lam = fold_lambda(lam)
    xa, ya = pair_a
    xb, yb = pair_b
    x = lam * np.asarray(xa, dtype=np.float64) + (1.0 - lam) * np.asarray(xb, dtype=np.float64)
    y = lam * np.asarray(ya, dtype=np.float64) + (1.0 - lam) * np.asarray(yb, dtype=np.float64)
    return x, y


def mixup(pair_a, pair_b, alpha: float, stream: Stream):
    """MixUp with lambda ~ Beta(alpha, alpha) folded to max(lambda, 1-lambda)."""
    if alpha <= 0:
        raise DataError("alpha must be positive")
    return mix_pair(pair_a, pair_b, stream.beta(alpha, alpha))


def rampup(t: float, rho: float) -> float:
    return min(t / rho, 1.0)


def mixmatch_loss(
    model: ToyModel,
    labelled: tuple[np.ndarray, np.ndarray],
    unlabelled: tuple[np.ndarray, np.ndarray],
    t: int,
    cfg: MixMatchConfig,
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and parameter gradients on post-MixUp batches.

    labelled = (inputs, label distributions) scored with mean cross-entropy;
    unlabelled = (inputs, pseudo-label distributions) scored with the mean
    Euclidean distance between distribution and model output, weighted by
    min(t/rho, 1) * gamma.  Pseudo-labels are constants here; gradients flow
    only through the model outputs.
    """
    xl, yl = labelled
    grads = {k: np.zeros_like(v) for k, v in model.params().items()}

    if xl.shape[0] < 1:
        raise DataError("labelled batch is empty")
    h_l, z_l = model._forward_cache(xl)
    logp = log_softmax(z_l)
    sup = float(-(yl * logp).sum(axis=1).mean())
    dz2 = (softmax(z_l) - yl) / xl.shape[0]
    model._backprop(xl, h_l, dz2, grads)

    loss = sup
    weight = rampup(t, cfg.rho) * cfg.gamma
    if weight > 0.0:
        xu, yu = unlabelled
        if xu.shape[0] < 1:
            raise DataError("unlabelled batch is empty")
        h_u, z_u = model._forward_cache(xu)
        p_u = softmax(z_u)
        resid = p_u - yu
        norms = np.sqrt((resid * resid).sum(axis=1))
        loss += weight * float(norms.mean())
        # d||r||/dz through softmax: J v = p*v - p (p.v), with v = r/||r||.
        safe = np.where(norms > 1e-12, norms, 1.0)
        v = resid / safe[:, None]
        v[norms <= 1e-12] = 0.0
        jv = p_u * v - p_u * (p_u * v).sum(axis=1, keepdims=True)
        model._backprop(xu, h_u, jv * (weight / xu.shape[0]), grads)

    if not np.isfinite(loss):
        raise FloatingPointError("non-finite loss")
    return loss, grads


@dataclass
class TrainResult:
    model: ToyModel
    accuracy_per_epoch: list[float]
    best_accuracy: float


def accuracy(model: ToyModel, x: np.ndarray, labels: np.ndarray) -> float:
    pred = model.predict_proba(x).argmax(axis=1)
    return float((pred == labels).mean())


def train(run: RunData, cfg: MixMatchConfig, seed: int) -> TrainResult:
    """Full MixMatch training loop; returns per-epoch test accuracy and the
    best epoch's value."""
    rng = Stream(seed).child("train")
    x_l = run.labelled.features.data.astype(np.float64)
    y_l = np.eye(run.labelled.num_classes)[run.labelled.labels]
    x_u = run.unlabelled.data.astype(np.float64)
    x_t = run.test.features.data.astype(np.float64)
    n_l, d = x_l.shape
    n_u = x_u.shape[0]

    model = ToyModel(d, run.labelled.num_classes, cfg.hidden, rng.child("init"))
    m_state = {k: np.zeros_like(v) for k, v in model.params().items()}
    v_state = {k: np.zeros_like(v) for k, v in model.params().items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    curve: list[float] = []
    step = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(n_l)
        for start in range(0, n_l, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            b_l = batch.shape[0]
            xb = x_l[batch] + cfg.sigma_aug * rng.normals(b_l * d).reshape(b_l, d)
            yb = y_l[batch]

            if cfg.gamma > 0.0:
                b_u = min(cfg.batch_size, n_u)
                u_idx = rng.sample_without_replacement(n_u, b_u)
                views = x_u[u_idx][None, :, :] + cfg.sigma_aug * rng.normals(
                    cfg.k * b_u * d
                ).reshape(cfg.k, b_u, d)
                q = softmax(model.logits(views.reshape(cfg.k * b_u, d)))
                q = q.reshape(cfg.k, b_u, -1).mean(axis=0)
                q = sharpen(q, cfg.temperature)
                pool_x = np.vstack([xb, views.reshape(cfg.k * b_u, d)])
                pool_y = np.vstack([yb, np.tile(q, (cfg.k, 1))])
            else:
                # Fully-supervised twin: no pseudo-labels anywhere, MixUp
                # stays within the labelled batch.
                pool_x, pool_y = xb, yb

            perm = rng.permutation(pool_x.shape[0])
            lam = rng.betas(cfg.alpha, cfg.alpha, pool_x.shape[0])
            lam = np.maximum(lam, 1.0 - lam)[:, None]
            mixed_x = lam * pool_x + (1.0 - lam) * pool_x[perm]
            mixed_y = lam * pool_y + (1.0 - lam) * pool_y[perm]

            try:
                loss, grads = mixmatch_loss(
                    model,
                    (mixed_x[:b_l], mixed_y[:b_l]),
                    (mixed_x[b_l:], mixed_y[b_l:]),
                    step,
                    cfg,
                )
            except FloatingPointError as exc:
                raise TrainingDiverged(epoch) from exc

            step += 1
            params = model.params()
            for key, grad in grads.items():
                m_state[key] = beta1 * m_state[key] + (1 - beta1) * grad
                v_state[key] = beta2 * v_state[key] + (1 - beta2) * grad * grad
                m_hat = m_state[key] / (1 - beta1**step)
                v_hat = v_state[key] / (1 - beta2**step)
                params[key] -= cfg.learning_rate * (
                    m_hat / (np.sqrt(v_hat) + eps) + cfg.weight_decay * params[key]
                )

        curve.append(accuracy(model, x_t, run.test.labels))

    return TrainResult(model=model, accuracy_per_epoch=curve, best_accuracy=max(curve))
