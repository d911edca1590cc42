"""Adam optimizer and the plateau learning-rate schedule."""

import numpy as np

from ..errors import DimensionError


class Adam:
    """Bias-corrected Adam over a list of parameter tensors.

    Moment buffers are created lazily at first step and always match the
    parameter shapes; the step counter increases by one per ``step()``.
    """

    def __init__(self, params, lr=0.005, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue
            if p.grad.shape != p.data.shape:
                raise DimensionError(
                    f"gradient shape {p.grad.shape} != parameter shape {p.data.shape}"
                )
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * p.grad
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * (p.grad * p.grad)
            m_hat = self.m[i] / (1.0 - b1 ** self.t)
            v_hat = self.v[i] / (1.0 - b2 ** self.t)
            p.data -= (self.lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(p.data.dtype)

    def zero_grad(self):
        for p in self.params:
            p.grad = None


class PlateauScheduler:
    """Decay the optimizer lr by ``factor`` after ``patience`` stagnant epochs.

    The tracked metric is higher-is-better (validation MIoU).  The counter
    resets both on improvement and on a triggered decay, so lr equals
    initial_lr * factor**k after k decays and never increases.
    """

    def __init__(self, optimizer, patience=6, factor=0.33):
        self.optimizer = optimizer
        self.patience = patience
        self.factor = factor
        self.best_metric = -np.inf
        self.epochs_since_improvement = 0

    @property
    def lr(self):
        return self.optimizer.lr

    def epoch_end(self, metric):
        """Record an epoch's validation metric; returns the (possibly decayed) lr."""
        if metric > self.best_metric:
            self.best_metric = metric
            self.epochs_since_improvement = 0
        else:
            self.epochs_since_improvement += 1
            if self.epochs_since_improvement >= self.patience:
                self.optimizer.lr *= self.factor
                self.epochs_since_improvement = 0
        return self.optimizer.lr
