"""Numpy implementation of the network kernels.

This is the reference backend: the compiled extension must match its
semantics (not bit-for-bit, both are float64 but may round differently).
Golden files are always produced against this backend.
"""

from __future__ import annotations

import numpy as np

ACT_SIGMOID, ACT_TANH, ACT_RELU = 0, 1, 2
OUT_NONE, OUT_RELU_SHIFTED = 0, 1

HIDDEN_ACTS = {"sigmoid": ACT_SIGMOID, "tanh": ACT_TANH, "relu": ACT_RELU}
OUTPUT_ACTS = {"none": OUT_NONE, "relu_shifted": OUT_RELU_SHIFTED}


def _hidden_forward(z, kind):
    if kind == ACT_SIGMOID:
        return 1.0 / (1.0 + np.exp(-z))
    if kind == ACT_TANH:
        return np.tanh(z)
    return np.maximum(z, 0.0)


def _hidden_deriv(a, kind):
    # Derivative from the activation value; relu uses a > 0 (subgradient 0 at 0).
    if kind == ACT_SIGMOID:
        return a * (1.0 - a)
    if kind == ACT_TANH:
        return 1.0 - a * a
    return (a > 0).astype(np.float64)


def _output_forward(z, kind):
    if kind == OUT_NONE:
        return z
    return np.maximum(z, 0.0) - 1.0


def _output_deriv(a, kind):
    if kind == OUT_NONE:
        return np.ones_like(a)
    return (a > -1.0).astype(np.float64)


def forward_all(Ws, bs, hidden_act, out_act, X):
    """All layer activations, input first, network output last."""
    acts = [np.asarray(X, dtype=np.float64)]
    last = len(Ws) - 1
    for l, (W, b) in enumerate(zip(Ws, bs)):
        z = acts[-1] @ W + b
        acts.append(_output_forward(z, out_act) if l == last else _hidden_forward(z, hidden_act))
    return acts


def forward(Ws, bs, hidden_act, out_act, X):
    return forward_all(Ws, bs, hidden_act, out_act, X)[-1]


def mae(Yhat, Y):
    return float(np.mean(np.abs(Yhat - Y)))


def backward_from_acts(Ws, acts, hidden_act, out_act, Y):
    """MAE loss and its gradients w.r.t. every weight and bias.

    The subgradient of |e| at e == 0 is taken as 0 (np.sign).
    """
    Yhat = acts[-1]
    m_elems = Yhat.size
    loss = float(np.abs(Yhat - Y).sum() / m_elems)
    delta = np.sign(Yhat - Y) / m_elems
    delta = delta * _output_deriv(Yhat, out_act)
    dWs = [None] * len(Ws)
    dbs = [None] * len(Ws)
    for l in range(len(Ws) - 1, -1, -1):
        dWs[l] = acts[l].T @ delta
        dbs[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ Ws[l].T) * _hidden_deriv(acts[l], hidden_act)
    return loss, dWs, dbs


def input_jacobian(Ws, bs, hidden_act, out_act, X):
    """d(output)/d(input) per sample, shape (n, out_dim, in_dim). Analytic."""
    acts = forward_all(Ws, bs, hidden_act, out_act, np.atleast_2d(X))
    out_d = _output_deriv(acts[-1], out_act)
    # J starts as d(yhat)/d(a_{L-1}) and is chained backwards to the input.
    J = out_d[:, :, None] * Ws[-1].T[None, :, :]
    for l in range(len(Ws) - 2, -1, -1):
        J = (J * _hidden_deriv(acts[l + 1], hidden_act)[:, None, :]) @ Ws[l].T
    return J


class PyTrainer:
    """Fused minibatch step: forward, MAE backward, Adam update in place."""

    def __init__(self, Ws, bs, hidden_act, out_act, lr, beta1, beta2, eps):
        self.Ws, self.bs = Ws, bs
        self.hidden_act, self.out_act = hidden_act, out_act
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.mW = [np.zeros_like(W) for W in Ws]
        self.vW = [np.zeros_like(W) for W in Ws]
        self.mb = [np.zeros_like(b) for b in bs]
        self.vb = [np.zeros_like(b) for b in bs]

    def forward(self, X):
        return forward(self.Ws, self.bs, self.hidden_act, self.out_act, X)

    def step(self, X, Y):
        acts = forward_all(self.Ws, self.bs, self.hidden_act, self.out_act, X)
        loss, dWs, dbs = backward_from_acts(self.Ws, acts, self.hidden_act, self.out_act, Y)
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(
            self.Ws + self.bs, dWs + dbs, self.mW + self.mb, self.vW + self.vb
        ):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
        return loss
