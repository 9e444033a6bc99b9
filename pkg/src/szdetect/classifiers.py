"""Baseline classifiers over feature vectors, implemented from scratch.

K-nearest neighbor (Euclidean, majority vote), Hart's condensed
nearest neighbor reduction, a soft-margin kernel SVM trained by
sequential minimal optimization, and full-batch logistic regression.
All consume rows of the windowed feature representation; none touch
class balance (skewed data is reported through F1 downstream).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mathutil import binary_cross_entropy, sigmoid

KERNELS = ("rbf", "poly", "sigmoid")


@dataclass(frozen=True)
class Dataset:
    """Feature vectors with parallel binary labels."""

    vectors: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if vectors.ndim != 2 or len(vectors) == 0:
            raise ValueError("vectors must be a nonempty n x d array")
        if labels.shape != (len(vectors),):
            raise ValueError("labels must parallel the vectors")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be binary")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def n_features(self) -> int:
        return self.vectors.shape[1]


# ---------------------------------------------------------------------------
# K-nearest neighbor


def knn_classify(train: Dataset, k: int, query) -> int:
    """Majority vote of the k nearest training vectors (Euclidean).

    Distance ties break toward the lower training index, which makes
    the prediction deterministic.
    """
    if k < 1 or k > len(train):
        raise ValueError(f"k={k} must be in [1, {len(train)}]")
    q = np.asarray(query, dtype=float)
    dist = np.linalg.norm(train.vectors - q, axis=1)
    nearest = np.argsort(dist, kind="stable")[:k]
    votes = int(train.labels[nearest].sum())
    return 1 if 2 * votes > k else 0


def knn_classify_many(train: Dataset, k: int, queries) -> np.ndarray:
    if k < 1 or k > len(train):
        raise ValueError(f"k={k} must be in [1, {len(train)}]")
    q = np.asarray(queries, dtype=float)
    # squared distances suffice for ranking and avoid n_q sqrt passes
    d2 = (
        np.sum(q * q, axis=1)[:, None]
        - 2.0 * q @ train.vectors.T
        + np.sum(train.vectors * train.vectors, axis=1)[None, :]
    )
    labels = np.empty(len(q), dtype=int)
    for i, row in enumerate(d2):
        nearest = np.argsort(row, kind="stable")[:k]
        votes = int(train.labels[nearest].sum())
        labels[i] = 1 if 2 * votes > k else 0
    return labels


def cnn_condense(train: Dataset, seed: int = 0) -> Dataset:
    """Hart's condensation: a 1-NN training-consistent subset.

    The scan order is a seeded shuffle.  The store starts with the
    first instance of each class in that order; every instance the
    current store misclassifies under 1-NN is added, and passes repeat
    until one adds nothing.
    """
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(train))

    store_idx: list[int] = []
    seen_classes: set[int] = set()
    for i in order:
        label = int(train.labels[i])
        if label not in seen_classes:
            store_idx.append(int(i))
            seen_classes.add(label)

    in_store = np.zeros(len(train), dtype=bool)
    in_store[store_idx] = True
    changed = True
    while changed:
        changed = False
        store = Dataset(train.vectors[store_idx], train.labels[store_idx])
        for i in order:
            if in_store[i]:
                continue
            if knn_classify(store, 1, train.vectors[i]) != train.labels[i]:
                store_idx.append(int(i))
                in_store[i] = True
                store = Dataset(train.vectors[store_idx], train.labels[store_idx])
                changed = True
    return Dataset(train.vectors[store_idx], train.labels[store_idx])


@dataclass(frozen=True)
class KnnModel:
    """A stored (possibly condensed) training set plus the vote size."""

    train: Dataset
    k: int
    condensed: bool = False


# ---------------------------------------------------------------------------
# Support vector machine (SMO)


@dataclass(frozen=True)
class SvmModel:
    kernel: str
    gamma: float
    degree: int
    coef0: float
    c_reg: float
    tol: float
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i per support vector
    bias: float

    @property
    def n_support(self) -> int:
        return len(self.dual_coef)


def kernel_matrix(kind: str, gamma: float, degree: int, coef0: float, a, b) -> np.ndarray:
    """Gram matrix K[i, j] = k(a_i, b_j) for the three supported kernels."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if kind == "rbf":
        d2 = (
            np.sum(a * a, axis=1)[:, None]
            - 2.0 * a @ b.T
            + np.sum(b * b, axis=1)[None, :]
        )
        return np.exp(-gamma * np.maximum(d2, 0.0))
    if kind == "poly":
        return (gamma * (a @ b.T) + coef0) ** degree
    if kind == "sigmoid":
        return np.tanh(gamma * (a @ b.T) + coef0)
    raise ValueError(f"unknown kernel {kind!r}")


def svm_train(
    train: Dataset,
    kernel: str = "rbf",
    gamma: float | None = None,
    degree: int = 3,
    coef0: float = 0.0,
    c_reg: float = 1.0,
    tol: float = 1e-3,
    max_iter: int = 100_000,
) -> SvmModel:
    """Solve the soft-margin dual by SMO.

    Working pairs are chosen by maximal KKT violation with second-order
    (greatest objective decrease) selection of the partner; iteration
    stops once the maximal violation is within ``tol``.  The sigmoid
    kernel is not positive definite, so non-positive pair curvature
    falls back to a tiny positive value, as is conventional.
    """
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {KERNELS}")
    if c_reg <= 0:
        raise ValueError("c_reg must be positive")
    classes = np.unique(train.labels)
    if len(classes) < 2:
        raise ValueError("SVM training needs both classes present")
    if gamma is None:
        gamma = 1.0 / train.n_features

    x = train.vectors
    y = np.where(train.labels == 1, 1.0, -1.0)
    n = len(x)
    k_mat = kernel_matrix(kernel, gamma, degree, coef0, x, x)

    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - e'a at a = 0
    eps = 1e-12

    for _ in range(max_iter):
        up = ((y > 0) & (alpha < c_reg - eps)) | ((y < 0) & (alpha > eps))
        low = ((y < 0) & (alpha < c_reg - eps)) | ((y > 0) & (alpha > eps))
        vals = -y * grad
        m_up = np.max(vals[up])
        m_low = np.min(vals[low])
        if m_up - m_low <= tol:
            break

        i = int(np.flatnonzero(up)[np.argmax(vals[up])])
        cand = low & (vals < m_up)
        cand_idx = np.flatnonzero(cand)
        b_gap = m_up - vals[cand_idx]
        curv = k_mat[i, i] + k_mat[cand_idx, cand_idx] - 2.0 * k_mat[i, cand_idx]
        curv = np.where(curv > 0, curv, 1e-12)
        j = int(cand_idx[np.argmin(-(b_gap * b_gap) / curv)])

        a_ij = k_mat[i, i] + k_mat[j, j] - 2.0 * k_mat[i, j]
        if a_ij <= 0:
            a_ij = 1e-12
        step = (vals[i] - vals[j]) / a_ij
        # box limits along the feasible direction (+y_i at i, -y_j at j)
        limit_i = c_reg - alpha[i] if y[i] > 0 else alpha[i]
        limit_j = alpha[j] if y[j] > 0 else c_reg - alpha[j]
        step = min(step, limit_i, limit_j)

        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        grad += step * y * (k_mat[:, i] - k_mat[:, j])

    free = (alpha > eps) & (alpha < c_reg - eps)
    vals = -y * grad
    if free.any():
        bias = float(np.mean(vals[free]))
    else:
        up = ((y > 0) & (alpha < c_reg - eps)) | ((y < 0) & (alpha > eps))
        low = ((y < 0) & (alpha < c_reg - eps)) | ((y > 0) & (alpha > eps))
        bias = float((np.max(vals[up]) + np.min(vals[low])) / 2.0)

    keep = alpha > eps
    return SvmModel(
        kernel=kernel,
        gamma=float(gamma),
        degree=int(degree),
        coef0=float(coef0),
        c_reg=float(c_reg),
        tol=float(tol),
        support_vectors=x[keep].copy(),
        dual_coef=(alpha * y)[keep],
        bias=bias,
    )


def svm_decision(model: SvmModel, x) -> np.ndarray:
    """Decision values sum(alpha_i y_i k(s_i, x)) + b for one or many x."""
    q = np.atleast_2d(np.asarray(x, dtype=float))
    if q.shape[1] != model.support_vectors.shape[1]:
        raise ValueError(
            f"query has {q.shape[1]} features, model expects "
            f"{model.support_vectors.shape[1]}"
        )
    k = kernel_matrix(
        model.kernel, model.gamma, model.degree, model.coef0, q, model.support_vectors
    )
    return k @ model.dual_coef + model.bias


def svm_classify(model: SvmModel, x) -> int:
    """Thresholded decision value; exactly zero maps to the seizure class."""
    value = float(svm_decision(model, x)[0])
    return 1 if value >= 0 else 0


def svm_classify_many(model: SvmModel, x) -> np.ndarray:
    return (svm_decision(model, x) >= 0).astype(int)


# ---------------------------------------------------------------------------
# Logistic regression


@dataclass(frozen=True)
class LrModel:
    weights: np.ndarray
    bias: float
    rate: float
    iters: int


def lr_train(
    train: Dataset,
    rate: float = 0.1,
    iters: int = 500,
    seed: int | None = None,
) -> LrModel:
    """Full-batch gradient descent on mean cross-entropy.

    Weights start at zero, so the run is deterministic; the seed is
    accepted for interface symmetry with the stochastic trainers but
    unused here.
    """
    del seed
    if rate <= 0:
        raise ValueError("rate must be positive")
    if iters < 0:
        raise ValueError("iters must be non-negative")
    x = train.vectors
    y = train.labels.astype(float)
    n = len(x)
    w = np.zeros(train.n_features)
    b = 0.0
    for _ in range(iters):
        p = sigmoid(x @ w + b)
        residual = p - y
        w -= rate * (x.T @ residual) / n
        b -= rate * float(np.mean(residual))
    return LrModel(weights=w, bias=b, rate=float(rate), iters=int(iters))


def lr_loss(model: LrModel, data: Dataset) -> float:
    """Mean cross-entropy of the model on a dataset."""
    return binary_cross_entropy(data.vectors @ model.weights + model.bias, data.labels)


def lr_probability(model: LrModel, x) -> np.ndarray:
    q = np.atleast_2d(np.asarray(x, dtype=float))
    if q.shape[1] != len(model.weights):
        raise ValueError(
            f"query has {q.shape[1]} features, model expects {len(model.weights)}"
        )
    return sigmoid(q @ model.weights + model.bias)


def lr_classify(model: LrModel, x) -> tuple[int, float]:
    """Class probability thresholded at 0.5 (probability 0.5 is seizure)."""
    p = float(lr_probability(model, x)[0])
    return (1 if p >= 0.5 else 0), p


def lr_classify_many(model: LrModel, x) -> np.ndarray:
    return (lr_probability(model, x) >= 0.5).astype(int)
