"""Small fully connected ReLU network trained with full-batch Adam."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import DimensionMismatch, InvalidConfig, NonFiniteLoss
from .boosting import log_softmax, softmax

MSE = "mse"
CROSS_ENTROPY = "cross_entropy"
N_CLASSES = 3


@dataclass(frozen=True)
class MlpParams:
    hidden: tuple[int, ...] = (35, 35)
    learning_rate: float = 0.009
    epochs: int = 2000
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if any(h < 1 for h in self.hidden):
            raise InvalidConfig("hidden layer widths must be >= 1")
        if self.epochs < 0:
            raise InvalidConfig("epochs must be >= 0")
        if self.learning_rate < 0:
            raise InvalidConfig("learning_rate must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d


@dataclass(frozen=True)
class Scaler:
    """Per-column z-scoring; zero-variance columns are only centered."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Scaler":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        return cls(mean, np.where(std > 0, std, 1.0))

    @classmethod
    def identity(cls, d: int) -> "Scaler":
        return cls(np.zeros(d), np.ones(d))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std


@dataclass(eq=False)
class MlpNetwork:
    """Affine layers ``weights[i]`` (in x out) and ``biases[i]``, ReLU between them.

    Regression networks learn standardized targets; ``target_mean`` and
    ``target_scale`` map outputs back to property units.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    scaler: Scaler
    objective: str = MSE
    target_mean: float = 0.0
    target_scale: float = 1.0
    loss_trace: list[float] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]

    @property
    def n_outputs(self) -> int:
        return self.weights[-1].shape[1]

    def parameters(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def copy(self) -> "MlpNetwork":
        return MlpNetwork(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.scaler,
            self.objective,
            self.target_mean,
            self.target_scale,
            list(self.loss_trace),
        )

    def predict(self, X) -> np.ndarray:
        """Property values (regression) or class scores (classification)."""
        out = mlp_forward(self, X)
        if self.objective == MSE:
            return out[:, 0] * self.target_scale + self.target_mean
        return out

    def predict_proba(self, X) -> np.ndarray:
        return softmax(mlp_forward(self, X))

    def to_dict(self) -> dict:
        return {
            "type": "mlp",
            "objective": self.objective,
            "layers": [
                {"shape": list(w.shape), "weights": w.ravel().tolist(), "bias": b.tolist()}
                for w, b in zip(self.weights, self.biases)
            ],
            "scaler": {"mean": self.scaler.mean.tolist(), "std": self.scaler.std.tolist()},
            "target_mean": self.target_mean,
            "target_scale": self.target_scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpNetwork":
        weights = [np.array(layer["weights"], dtype=float).reshape(layer["shape"]) for layer in d["layers"]]
        biases = [np.array(layer["bias"], dtype=float) for layer in d["layers"]]
        scaler = Scaler(np.array(d["scaler"]["mean"], dtype=float), np.array(d["scaler"]["std"], dtype=float))
        return cls(weights, biases, scaler, d["objective"], float(d["target_mean"]), float(d["target_scale"]))


def _as_matrix(net: MlpNetwork, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != net.n_features:
        raise DimensionMismatch(f"network expects {net.n_features} features, got shape {X.shape}")
    return X


def mlp_forward(net: MlpNetwork, X) -> np.ndarray:
    """Raw network output for a d-vector or an n x d batch, always 2-D."""
    a = net.scaler.transform(_as_matrix(net, X))
    last = len(net.weights) - 1
    for i, (W, b) in enumerate(zip(net.weights, net.biases)):
        a = a @ W + b
        if i < last:
            a = np.maximum(a, 0.0)
    return a


def loss_and_grads(net: MlpNetwork, Z: np.ndarray, targets: np.ndarray, sample_weight=None):
    """Loss and parameter gradients on already-scaled inputs ``Z``.

    MSE targets are a vector in network units; cross-entropy targets are
    integer labels.  Gradients come back in ``net.parameters()`` order.
    """
    acts = [Z]
    pre = []
    last = len(net.weights) - 1
    a = Z
    for i, (W, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0) if i < last else z
        acts.append(a)
    out = acts[-1]
    n = len(Z)
    w = np.full(n, 1.0 / n) if sample_weight is None else sample_weight / sample_weight.sum()

    if net.objective == MSE:
        resid = out[:, 0] - targets
        loss = float(np.sum(w * resid * resid))
        delta = (2.0 * w * resid)[:, None]
    else:
        logp = log_softmax(out)
        idx = np.arange(n)
        loss = float(-np.sum(w * logp[idx, targets]))
        delta = np.exp(logp)
        delta[idx, targets] -= 1.0
        delta *= w[:, None]

    gw = [None] * len(net.weights)
    gb = [None] * len(net.biases)
    for i in range(last, -1, -1):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ net.weights[i].T) * (pre[i - 1] > 0)
    return loss, [*gw, *gb]


def init_network(d: int, n_out: int, hidden, seed: int, objective: str) -> MlpNetwork:
    """He-uniform weights (limit sqrt(6 / fan_in)), zero biases, identity scaler."""
    rng = np.random.default_rng(seed)
    sizes = [d, *hidden, n_out]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpNetwork(weights, biases, Scaler.identity(d), objective)


class Adam:
    def __init__(self, params: list[np.ndarray], lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """Update ``params`` in place."""
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def mlp_train(X, targets, objective: str = MSE, params: MlpParams | None = None, seed: int = 0,
              sample_weight=None) -> MlpNetwork:
    """Full-batch Adam training from a seeded He-uniform start.

    ``loss_trace[e]`` is the training loss before update ``e + 1`` (standardized
    units for MSE).  Raises :class:`NonFiniteLoss` if training diverges.
    """
    params = params or MlpParams()
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets)
    if X.ndim != 2 or targets.ndim != 1 or len(X) != len(targets):
        raise DimensionMismatch(f"X {X.shape} and targets {targets.shape} do not line up")
    if len(X) == 0:
        raise InvalidConfig("cannot train on zero rows")
    if objective not in (MSE, CROSS_ENTROPY):
        raise InvalidConfig(f"unknown objective {objective!r}")

    n_out = 1 if objective == MSE else N_CLASSES
    net = init_network(X.shape[1], n_out, params.hidden, seed, objective)
    net.scaler = Scaler.fit(X)
    if objective == MSE:
        y = targets.astype(float)
        net.target_mean = float(y.mean())
        sd = float(y.std())
        if not np.isfinite(sd):
            raise NonFiniteLoss("target standard deviation overflows; rescale the property")
        net.target_scale = sd if sd > 0 else 1.0
        t = (y - net.target_mean) / net.target_scale
    else:
        t = targets.astype(np.int64)
        if t.min() < 0 or t.max() >= N_CLASSES:
            raise InvalidConfig("labels must be in {0, 1, 2}")
    w = None if sample_weight is None else np.asarray(sample_weight, dtype=float)

    Z = net.scaler.transform(X)
    opt = Adam(net.parameters(), params.learning_rate, params.beta1, params.beta2, params.eps)
    # overflow surfaces as a non-finite loss below
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(params.epochs):
            loss, grads = loss_and_grads(net, Z, t, w)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"training loss became {loss} at epoch {epoch}; try a lower learning rate")
            net.loss_trace.append(loss)
            opt.step(net.parameters(), grads)
    return net


def numerical_gradient_check(net: MlpNetwork, X, targets, epsilon: float = 1e-5) -> float:
    """Max relative error between backprop and central-difference gradients.

    The error per parameter is ``|fd - an| / max(1e-8, |fd| + |an|)``.
    ``targets`` are in network units for MSE and labels for cross-entropy.
    """
    Z = net.scaler.transform(_as_matrix(net, X))
    targets = np.asarray(targets)
    if net.objective == CROSS_ENTROPY:
        targets = targets.astype(np.int64)
    else:
        targets = targets.astype(float)
    probe = net.copy()
    _, analytic = loss_and_grads(probe, Z, targets)
    worst = 0.0
    for p, g_an in zip(probe.parameters(), analytic):
        flat = p.reshape(-1)
        g_flat = g_an.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up, _ = loss_and_grads(probe, Z, targets)
            flat[i] = orig - epsilon
            down, _ = loss_and_grads(probe, Z, targets)
            flat[i] = orig
            fd = (up - down) / (2.0 * epsilon)
            err = abs(fd - g_flat[i]) / max(1e-8, abs(fd) + abs(g_flat[i]))
            worst = max(worst, err)
    return worst
