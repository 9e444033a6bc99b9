"""Shared numerically-stable primitives."""

from __future__ import annotations

import numpy as np


def sigmoid(z):
    """Logistic function, evaluated without overflow for large |z|."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z):
    """Row-wise softmax with max-shift stabilization."""
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=-1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=-1, keepdims=True)


def binary_cross_entropy(logits, labels) -> float:
    """Mean cross-entropy of logistic outputs against {0,1} labels.

    Computed as log(1 + e^z) - y*z via logaddexp, which is stable for
    any logit magnitude.
    """
    z = np.asarray(logits, dtype=float)
    y = np.asarray(labels, dtype=float)
    return float(np.mean(np.logaddexp(0.0, z) - y * z))
