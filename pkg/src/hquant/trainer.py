"""Mini-batch Adam training of a Householder stack against a quantization loss.

The orthogonal map is parametrized by its reflection vectors, so every Adam
step stays exactly on the orthogonal group; no projection or re-orthogonal-
ization is ever needed.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DimensionMismatchError, NonFiniteError
from .householder import NORM_FLOOR, HouseholderStack, random_stack
from .losses import LossKind, loss_grad, loss_value, normalize


def default_learning_rate(kind):
    """0.1 for all losses except bit-var, which trains stably at 0.01."""
    return 0.01 if kind is LossKind.BIT_VAR else 0.1


@dataclass
class TrainConfig:
    """Rotation-training hyperparameters.

    ``learning_rate=None`` resolves to the per-loss default.  ``epochs=0``
    is legal and returns the seeded random initialization unchanged.
    """

    loss: LossKind = LossKind.L2
    learning_rate: float | None = None
    epochs: int = 300
    batch_size: int = 128
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate is None:
            self.learning_rate = default_learning_rate(self.loss)
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class TrainReport:
    """Loss bookkeeping for one fit: per-epoch batch-mean losses plus a
    full-data evaluation at start and end."""

    epoch_losses: list = field(default_factory=list)
    initial_loss: float = 0.0
    final_loss: float = 0.0
    elapsed: float = 0.0


class AdamOptimizer:
    """Bias-corrected Adam on a single parameter array."""

    def __init__(self, shape, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)

    def step(self, params, grad):
        """One update, in place on ``params``."""
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grad * grad)
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return params

    def reset_rows(self, rows):
        """Forget the moments of re-initialized parameter rows."""
        self.m[rows] = 0.0
        self.v[rows] = 0.0


def stack_backprop(stack, x_batch, grad_out):
    """Reverse-mode gradients through the reflection chain.

    Given ``grad_out`` = dL/dZ for Z = apply_stack(stack, x_batch), returns
    (dL/dv_i stacked as an (m, k) array, dL/dx_batch).  Exploits the rank-1
    structure for O(b k^2) total cost.
    """
    x = np.atleast_2d(np.asarray(x_batch, dtype=np.float64))
    g = np.atleast_2d(np.asarray(grad_out, dtype=np.float64))
    if x.shape[1] != stack.dim or g.shape != x.shape:
        raise DimensionMismatchError(
            f"batch {x.shape} / grad {g.shape} do not match stack dim {stack.dim}"
        )
    acts = _backend.record_rotation(stack.vectors, x)
    return _backend.rotation_backprop(stack.vectors, acts, g)


def _reseed_degenerate(vectors, opt, rng):
    norms = np.linalg.norm(vectors, axis=1)
    bad = np.flatnonzero(norms <= NORM_FLOOR)
    for i in bad:
        while np.linalg.norm(vectors[i]) <= NORM_FLOOR:
            vectors[i] = rng.standard_normal(vectors.shape[1])
        opt.reset_rows(int(i))


def fit(embeddings, config):
    """Train a k-reflection stack minimizing the configured loss.

    Normalizes the embeddings onto the sqrt(k) sphere, initializes from
    ``random_stack(k, config.seed)``, then runs ``config.epochs`` passes of
    shuffled mini-batches with one Adam step per batch.  Identical inputs
    and seed reproduce the trained stack bitwise on one platform.

    Returns (trained HouseholderStack, TrainReport).
    """
    if embeddings.n == 0:
        raise ValueError("cannot fit on an empty embedding set")
    data = normalize(embeddings).data
    n, k = data.shape

    vectors = np.array(random_stack(k, config.seed).vectors)
    rng = np.random.default_rng(config.seed)
    opt = AdamOptimizer(
        vectors.shape,
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_epsilon,
    )

    start = time.perf_counter()
    try:
        initial_loss = loss_value(config.loss, _backend.rotate_rows(vectors, data))
    except NonFiniteError as exc:
        raise NonFiniteError(f"non-finite loss at the initial evaluation: {exc}") from exc
    epoch_losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        batch_losses = []
        for b, lo in enumerate(range(0, n, config.batch_size)):
            xb = data[order[lo : lo + config.batch_size]]
            acts = _backend.record_rotation(vectors, xb)
            try:
                batch_loss = loss_value(config.loss, acts[0])
            except NonFiniteError as exc:
                raise NonFiniteError(f"non-finite loss at epoch {epoch}, batch {b}") from exc
            if not np.isfinite(batch_loss):
                raise NonFiniteError(f"non-finite loss at epoch {epoch}, batch {b}")
            g = loss_grad(config.loss, acts[0])
            vgrads, _ = _backend.rotation_backprop(vectors, acts, g)
            opt.step(vectors, vgrads)
            _reseed_degenerate(vectors, opt, rng)
            batch_losses.append(batch_loss)
        epoch_losses.append(float(np.mean(batch_losses)))
    final_loss = loss_value(config.loss, _backend.rotate_rows(vectors, data))
    elapsed = time.perf_counter() - start

    stack = HouseholderStack(dim=k, vectors=vectors)
    report = TrainReport(
        epoch_losses=epoch_losses,
        initial_loss=initial_loss,
        final_loss=final_loss,
        elapsed=elapsed,
    )
    return stack, report
