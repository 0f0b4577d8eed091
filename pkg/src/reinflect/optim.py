"""AdaDelta optimizer and gradient clipping.

Update rule (no global learning rate):

    E[g2]  <- rho * E[g2] + (1 - rho) * g^2
    delta  =  -sqrt(E[dx2] + eps) / sqrt(E[g2] + eps) * g
    E[dx2] <- rho * E[dx2] + (1 - rho) * delta^2
    x      <- x + delta
"""

from __future__ import annotations

import numpy as np

from .autodiff import Node
from .errors import ConfigError, DimensionError


class AdaDelta:
    def __init__(self, params: list[Node], rho: float = 0.95, eps: float = 1e-6):
        if not 0.0 < rho < 1.0:
            raise ConfigError(f"adadelta rho must be in (0, 1), got {rho}")
        if eps <= 0.0:
            raise ConfigError(f"adadelta eps must be positive, got {eps}")
        self.params = params
        self.rho = rho
        self.eps = eps
        self.sq_grad = [np.zeros_like(p.value) for p in params]
        self.sq_delta = [np.zeros_like(p.value) for p in params]

    def step(self, grads: list[np.ndarray] | None = None) -> None:
        """Apply one update; grads default to each node's accumulated .grad."""
        if grads is None:
            grads = [p.grad if p.grad is not None else np.zeros_like(p.value)
                     for p in self.params]
        if len(grads) != len(self.params):
            raise DimensionError("adadelta: gradient list length mismatch")
        rho, eps = self.rho, self.eps
        for i, (p, g) in enumerate(zip(self.params, grads)):
            if g.shape != p.value.shape:
                raise DimensionError(
                    f"adadelta: grad shape {g.shape} != param shape {p.value.shape}"
                )
            eg2 = self.sq_grad[i]
            edx2 = self.sq_delta[i]
            eg2 *= rho
            eg2 += (1.0 - rho) * g * g
            delta = -np.sqrt(edx2 + eps) / np.sqrt(eg2 + eps) * g
            edx2 *= rho
            edx2 += (1.0 - rho) * delta * delta
            p.value = p.value + delta


def clip_gradients(params: list[Node], max_norm: float) -> float:
    """Scale all grads so their global L2 norm is at most max_norm.

    Direction is preserved; returns the pre-clip norm.
    """
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float(np.sum(p.grad * p.grad))
    norm = float(np.sqrt(total))
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= scale
    return norm
