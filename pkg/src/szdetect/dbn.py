"""Restricted Boltzmann Machines and the stacked belief network.

RBMs are trained with single-step contrastive divergence on visible
units that are real probabilities in [0, 1] (the min-max scaled feature
vectors).  Hidden units are sampled as binaries only to drive the
reconstruction; every outer product in the update uses probabilities.
A stack of RBMs is pretrained greedily layer by layer without labels,
then paired with a 2-way logistic output layer and finetuned with
labels.  Classification is a deterministic forward pass: each layer
applies its weight matrix and hidden bias through the logistic
function, visible biases and the reverse weight direction are unused,
and the label is the argmax of the softmax output.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .classifiers import Dataset
from .mathutil import sigmoid, softmax
from .preprocessing import MinMaxScaler

DEFAULT_LAYER_SIZES = (207, 500, 500)
DEFAULT_PRETRAIN_EPOCHS = 25
DEFAULT_PRETRAIN_RATE = 0.001
DEFAULT_FINETUNE_ITERS = 16
DEFAULT_FINETUNE_RATE = 0.1
DEFAULT_BATCH_SIZE = 10
FINETUNE_MODES = ("full", "top")


@dataclass(frozen=True)
class Rbm:
    """One restricted Boltzmann machine.

    ``weights`` is visible x hidden; the biases match those two sizes.
    """

    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray

    def __post_init__(self):
        i, j = self.weights.shape
        if self.visible_bias.shape != (i,) or self.hidden_bias.shape != (j,):
            raise ValueError("bias lengths must match the weight matrix")

    @property
    def n_visible(self) -> int:
        return self.weights.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class DbnTrainingConfig:
    """Hyperparameter provenance stored with a trained network."""

    layer_sizes: tuple = DEFAULT_LAYER_SIZES
    pretrain_epochs: int = DEFAULT_PRETRAIN_EPOCHS
    pretrain_rate: float = DEFAULT_PRETRAIN_RATE
    finetune_iters: int = DEFAULT_FINETUNE_ITERS
    finetune_rate: float = DEFAULT_FINETUNE_RATE
    batch_size: int = DEFAULT_BATCH_SIZE
    mode: str = "full"
    seed: int = 0


@dataclass(frozen=True)
class DbnModel:
    """Pretrained+finetuned RBM stack with a 2-way logistic output layer."""

    rbms: tuple
    output_weights: np.ndarray  # (last hidden size, 2)
    output_bias: np.ndarray  # (2,)
    scaler: MinMaxScaler | None = None
    config: DbnTrainingConfig = DbnTrainingConfig()

    def __post_init__(self):
        size = self.rbms[0].n_visible
        for rbm in self.rbms:
            if rbm.n_visible != size:
                raise ValueError("RBM layer sizes do not chain")
            size = rbm.n_hidden
        if self.output_weights.shape != (size, 2) or self.output_bias.shape != (2,):
            raise ValueError("output layer must map the last hidden layer to 2 classes")

    @property
    def layer_sizes(self) -> tuple:
        return tuple([self.rbms[0].n_visible] + [r.n_hidden for r in self.rbms])


def rbm_init(n_visible: int, n_hidden: int, seed) -> Rbm:
    """Uniform weight init in +/- 4*sqrt(6/(n_visible+n_hidden)), zero biases."""
    if n_visible < 1 or n_hidden < 1:
        raise ValueError("layer sizes must be positive")
    rng = np.random.default_rng(seed)
    bound = 4.0 * np.sqrt(6.0 / (n_visible + n_hidden))
    return Rbm(
        weights=rng.uniform(-bound, bound, size=(n_visible, n_hidden)),
        visible_bias=np.zeros(n_visible),
        hidden_bias=np.zeros(n_hidden),
    )


def rbm_hidden_probs(rbm: Rbm, visible) -> np.ndarray:
    """P(h=1 | v) = logistic(W'v + h), for one vector or a batch."""
    v = np.asarray(visible, dtype=float)
    if v.shape[-1] != rbm.n_visible:
        raise ValueError(f"visible size {v.shape[-1]} != {rbm.n_visible}")
    return sigmoid(v @ rbm.weights + rbm.hidden_bias)


def rbm_visible_probs(rbm: Rbm, hidden) -> np.ndarray:
    """P(v=1 | h) = logistic(Wh + v), for one vector or a batch."""
    h = np.asarray(hidden, dtype=float)
    if h.shape[-1] != rbm.n_hidden:
        raise ValueError(f"hidden size {h.shape[-1]} != {rbm.n_hidden}")
    return sigmoid(h @ rbm.weights.T + rbm.visible_bias)


def rbm_cd1_update(rbm: Rbm, batch, rate: float, rng) -> Rbm:
    """One CD-1 step on a batch, returning the updated machine.

    Exactly one uniform array of shape (len(batch), n_hidden) is drawn
    from ``rng`` to sample the binary hidden states; the reconstruction
    and both outer products use probabilities.  The update is the
    batch-mean positive minus negative gradient, scaled by ``rate``.
    """
    v0 = np.atleast_2d(np.asarray(batch, dtype=float))
    if v0.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    if v0.shape[1] != rbm.n_visible:
        raise ValueError(f"batch width {v0.shape[1]} != {rbm.n_visible}")

    h0_probs = rbm_hidden_probs(rbm, v0)
    h0_sample = (rng.uniform(size=h0_probs.shape) < h0_probs).astype(float)
    v1 = rbm_visible_probs(rbm, h0_sample)
    h1_probs = rbm_hidden_probs(rbm, v1)

    n = len(v0)
    dw = (v0.T @ h0_probs - v1.T @ h1_probs) / n
    dvb = np.mean(v0 - v1, axis=0)
    dhb = np.mean(h0_probs - h1_probs, axis=0)
    return Rbm(
        weights=rbm.weights + rate * dw,
        visible_bias=rbm.visible_bias + rate * dvb,
        hidden_bias=rbm.hidden_bias + rate * dhb,
    )


def rbm_reconstruction_cross_entropy(rbm: Rbm, data) -> float:
    """Mean elementwise cross-entropy of the deterministic reconstruction."""
    v = np.atleast_2d(np.asarray(data, dtype=float))
    recon = rbm_visible_probs(rbm, rbm_hidden_probs(rbm, v))
    recon = np.clip(recon, 1e-12, 1.0 - 1e-12)
    return float(np.mean(-(v * np.log(recon) + (1.0 - v) * np.log(1.0 - recon))))


def _minibatches(n: int, batch_size: int, order) -> list:
    return [order[start : start + batch_size] for start in range(0, n, batch_size)]


def dbn_pretrain(
    layer_sizes=DEFAULT_LAYER_SIZES,
    data=None,
    epochs: int = DEFAULT_PRETRAIN_EPOCHS,
    rate: float = DEFAULT_PRETRAIN_RATE,
    batch_size: int = DEFAULT_BATCH_SIZE,
    seed: int = 0,
) -> list:
    """Greedy unsupervised layerwise CD-1 training of the RBM stack.

    The first machine trains on the data; each later machine trains on
    the previous layer's deterministic hidden probabilities.  Labels
    never enter.  Init, hidden sampling, and epoch shuffling use three
    independent streams derived from the one seed, so runs reproduce
    exactly.
    """
    x = np.atleast_2d(np.asarray(data, dtype=float))
    if x.shape[1] != layer_sizes[0]:
        raise ValueError(
            f"data dimension {x.shape[1]} != first layer size {layer_sizes[0]}"
        )
    if len(layer_sizes) < 2:
        raise ValueError("need at least one (visible, hidden) layer pair")

    init_rng, sample_rng, shuffle_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )

    stack = []
    current = x
    n = len(x)
    for n_visible, n_hidden in zip(layer_sizes[:-1], layer_sizes[1:]):
        rbm = rbm_init(n_visible, n_hidden, init_rng)
        for _ in range(epochs):
            order = shuffle_rng.permutation(n)
            for idx in _minibatches(n, batch_size, order):
                rbm = rbm_cd1_update(rbm, current[idx], rate, sample_rng)
        stack.append(rbm)
        current = rbm_hidden_probs(rbm, current)
    return stack


def _forward_activations(rbms, out_w, out_b, x) -> tuple:
    """Hidden activations per layer plus output class probabilities."""
    activations = [x]
    for rbm in rbms:
        activations.append(sigmoid(activations[-1] @ rbm.weights + rbm.hidden_bias))
    probs = softmax(activations[-1] @ out_w + out_b)
    return activations, probs


def dbn_loss_and_gradients(weights, biases, out_w, out_b, x, labels, mode="full"):
    """Mean cross-entropy of a batch and its gradients at these parameters.

    ``weights``/``biases`` are the per-layer matrices and hidden biases.
    Returns (loss, layer weight grads, layer bias grads, output weight
    grad, output bias grad); in ``top`` mode the layer gradients are
    zero.  This is the exact quantity one finetuning step descends.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    onehot = np.eye(2)[np.asarray(labels, dtype=int)]
    n = len(x)

    acts = [x]
    for w, b in zip(weights, biases):
        acts.append(sigmoid(acts[-1] @ w + b))
    probs = softmax(acts[-1] @ out_w + out_b)
    loss = float(np.mean(-np.log(np.sum(probs * onehot, axis=1))))

    delta = (probs - onehot) / n
    grad_out_w = acts[-1].T @ delta
    grad_out_b = delta.sum(axis=0)

    grads_w = [np.zeros_like(w) for w in weights]
    grads_b = [np.zeros_like(b) for b in biases]
    if mode == "full":
        upstream = delta @ out_w.T
        for layer in range(len(weights) - 1, -1, -1):
            a = acts[layer + 1]
            dz = upstream * a * (1.0 - a)
            grads_w[layer] = acts[layer].T @ dz
            grads_b[layer] = dz.sum(axis=0)
            upstream = dz @ weights[layer].T
    return loss, grads_w, grads_b, grad_out_w, grad_out_b


def dbn_finetune(
    stack,
    train: Dataset,
    rate: float = DEFAULT_FINETUNE_RATE,
    iters: int = DEFAULT_FINETUNE_ITERS,
    batch_size: int = DEFAULT_BATCH_SIZE,
    seed: int = 0,
    mode: str = "full",
    validation: Dataset | None = None,
    scaler: MinMaxScaler | None = None,
    config: DbnTrainingConfig | None = None,
) -> DbnModel:
    """Supervised minibatch training of the stacked network.

    Mode ``full`` backpropagates the cross-entropy through the logistic
    output layer and every RBM weight matrix (the forward pass is the
    deterministic probability pass); mode ``top`` updates only the
    output layer and leaves the RBM parameters bit-identical.  When a
    validation set is supplied, the parameters with the best validation
    F1 seen at any iteration boundary are the ones returned.
    """
    if mode not in FINETUNE_MODES:
        raise ValueError(f"mode must be one of {FINETUNE_MODES}")
    x = train.vectors
    y = train.labels
    if x.shape[1] != stack[0].n_visible:
        raise ValueError(f"data dimension {x.shape[1]} != {stack[0].n_visible}")

    weights = [rbm.weights.copy() for rbm in stack]
    biases = [rbm.hidden_bias.copy() for rbm in stack]
    out_w = np.zeros((stack[-1].n_hidden, 2))
    out_b = np.zeros(2)

    shuffle_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    n = len(x)

    def snapshot() -> DbnModel:
        rbms = tuple(
            replace(rbm, weights=w.copy(), hidden_bias=b.copy())
            for rbm, w, b in zip(stack, weights, biases)
        )
        cfg = config if config is not None else DbnTrainingConfig(
            layer_sizes=tuple([stack[0].n_visible] + [r.n_hidden for r in stack]),
            finetune_iters=iters,
            finetune_rate=rate,
            batch_size=batch_size,
            mode=mode,
            seed=seed,
        )
        return DbnModel(
            rbms=rbms,
            output_weights=out_w.copy(),
            output_bias=out_b.copy(),
            scaler=scaler,
            config=cfg,
        )

    best_model = None
    best_f1 = -1.0

    for _ in range(iters):
        order = shuffle_rng.permutation(n)
        for idx in _minibatches(n, batch_size, order):
            _, grads_w, grads_b, grad_out_w, grad_out_b = dbn_loss_and_gradients(
                weights, biases, out_w, out_b, x[idx], y[idx], mode=mode
            )
            if mode == "full":
                for layer in range(len(weights)):
                    weights[layer] -= rate * grads_w[layer]
                    biases[layer] -= rate * grads_b[layer]
            out_w -= rate * grad_out_w
            out_b -= rate * grad_out_b

        if validation is not None:
            model = snapshot()
            f1 = _f1_score(dbn_predict_many(model, validation.vectors)[0], validation.labels)
            if f1 > best_f1:
                best_f1 = f1
                best_model = model

    if validation is not None and best_model is not None:
        return best_model
    return snapshot()


def _f1_score(predictions, labels) -> float:
    tp = int(np.sum((predictions == 1) & (labels == 1)))
    fp = int(np.sum((predictions == 1) & (labels == 0)))
    fn = int(np.sum((predictions == 0) & (labels == 1)))
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def dbn_predict(model: DbnModel, x) -> tuple[int, np.ndarray]:
    """Deterministic forward classification of one vector.

    Returns the argmax label and the two class probabilities; an exact
    probability tie resolves to the non-seizure label 0.
    """
    labels, probs = dbn_predict_many(model, np.atleast_2d(np.asarray(x, dtype=float)))
    return int(labels[0]), probs[0]


def dbn_predict_many(model: DbnModel, x) -> tuple[np.ndarray, np.ndarray]:
    q = np.atleast_2d(np.asarray(x, dtype=float))
    if q.shape[1] != model.rbms[0].n_visible:
        raise ValueError(
            f"query width {q.shape[1]} != input size {model.rbms[0].n_visible}"
        )
    _, probs = _forward_activations(
        model.rbms, model.output_weights, model.output_bias, q
    )
    # ties go to label 0: argmax returns the first maximal index
    return np.argmax(probs, axis=1), probs
