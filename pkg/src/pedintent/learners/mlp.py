"""Two-layer perceptron: d -> hidden tanh -> 2 tanh, mean squared error.

Trained full-batch by gradient descent with a backtracking line search;
an accepted step never increases the loss. Targets are one-hot rows over
{0, 1}; the loss averages the squared error over every output entry.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, NumericalError

DEFAULT_HIDDEN = 10
DEFAULT_OUTPUTS = 2
INIT_SPAN = 0.5
_GROW = 1.5
_SHRINK = 0.5
_MAX_BACKTRACKS = 40


@dataclass
class MlpModel:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    loss_history: list = field(default_factory=list, repr=False)

    @property
    def n_inputs(self):
        return self.W1.shape[1]

    @property
    def n_hidden(self):
        return self.W1.shape[0]

    @property
    def n_outputs(self):
        return self.W2.shape[0]


def mlp_init(n_inputs, n_hidden=DEFAULT_HIDDEN, n_outputs=DEFAULT_OUTPUTS, seed=0):
    """Uniform [-0.5, 0.5) weights drawn in the order W1, b1, W2, b2."""
    if n_inputs < 1 or n_hidden < 1 or n_outputs < 1:
        raise DataError("layer sizes must be positive")
    rng = np.random.default_rng(seed)
    W1 = rng.uniform(-INIT_SPAN, INIT_SPAN, size=(n_hidden, n_inputs))
    b1 = rng.uniform(-INIT_SPAN, INIT_SPAN, size=n_hidden)
    W2 = rng.uniform(-INIT_SPAN, INIT_SPAN, size=(n_outputs, n_hidden))
    b2 = rng.uniform(-INIT_SPAN, INIT_SPAN, size=n_outputs)
    return MlpModel(W1, b1, W2, b2)


def mlp_forward(model, X):
    """Hidden activations and outputs, both tanh."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    A1 = np.tanh(X @ model.W1.T + model.b1)
    out = np.tanh(A1 @ model.W2.T + model.b2)
    return A1, out


def mlp_loss(model, X, T):
    """Mean of (out - T)^2 over all n * n_outputs entries."""
    _, out = mlp_forward(model, X)
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    return float(np.mean((out - T) ** 2))


def mlp_grad(model, X, T):
    """Analytic gradient of mlp_loss in parameter order W1, b1, W2, b2."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    n = X.shape[0]
    A1, out = mlp_forward(model, X)
    # d loss / d out, with loss averaged over n * n_outputs entries
    d_out = 2.0 * (out - T) / (n * out.shape[1])
    d_z2 = d_out * (1.0 - out ** 2)
    gW2 = d_z2.T @ A1
    gb2 = d_z2.sum(axis=0)
    d_a1 = d_z2 @ model.W2
    d_z1 = d_a1 * (1.0 - A1 ** 2)
    gW1 = d_z1.T @ X
    gb1 = d_z1.sum(axis=0)
    return gW1, gb1, gW2, gb2


def one_hot_targets(y, n_classes=DEFAULT_OUTPUTS):
    """Class indices {0..k-1} to one-hot rows over {0, 1}."""
    y = np.asarray(y, dtype=np.intp)
    if y.min() < 0 or y.max() >= n_classes:
        raise DataError("class index out of range")
    T = np.zeros((y.size, n_classes))
    T[np.arange(y.size), y] = 1.0
    return T


def mlp_train(X, T, n_hidden=DEFAULT_HIDDEN, epochs=200, seed=0, step0=1.0):
    """Full-batch descent; each epoch takes the steepest step that does
    not increase the loss (backtracking from an adaptive trial step).

    Raises NumericalError, naming the epoch, if the loss goes non-finite.
    Training stops early when backtracking cannot find any acceptable
    step (gradient numerically flat).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    if X.shape[0] != T.shape[0]:
        raise DataError("mlp_train: X and targets disagree")
    model = mlp_init(X.shape[1], n_hidden, T.shape[1], seed)
    loss = mlp_loss(model, X, T)
    if not np.isfinite(loss):
        raise NumericalError("mlp_train: non-finite loss at epoch 0")
    model.loss_history.append(loss)
    step = step0
    for epoch in range(1, epochs + 1):
        grads = mlp_grad(model, X, T)
        params = (model.W1, model.b1, model.W2, model.b2)
        accepted = False
        trial = step
        for _ in range(_MAX_BACKTRACKS):
            cand = MlpModel(*(p - trial * g for p, g in zip(params, grads)))
            cand_loss = mlp_loss(cand, X, T)
            if not np.isfinite(cand_loss):
                trial *= _SHRINK
                continue
            if cand_loss <= loss:
                accepted = True
                break
            trial *= _SHRINK
        if not accepted:
            break
        model = MlpModel(cand.W1, cand.b1, cand.W2, cand.b2,
                         model.loss_history)
        loss = cand_loss
        if not np.isfinite(loss):
            raise NumericalError("mlp_train: non-finite loss at epoch %d" % epoch)
        model.loss_history.append(loss)
        step = trial * _GROW
    return model


def mlp_predict(model, X):
    """Class indices by output argmax (ties go to the lower index)."""
    _, out = mlp_forward(model, X)
    return np.argmax(out, axis=1)
