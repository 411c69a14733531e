"""Minibatch scheduling plus SGD and Adam parameter updates.

Both step functions are functional: they return a new network (and state)
and leave their inputs untouched.
"""

from dataclasses import dataclass

import numpy as np

from .nn import ShapeError


def permutation(n, seed, epoch):
    """Seeded permutation of range(n); distinct (seed, epoch) pairs give independent draws."""
    rng = np.random.default_rng([int(seed), int(epoch)])
    return rng.permutation(n)


def chunk(indices, batch_size):
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    return [indices[k:k + batch_size] for k in range(0, len(indices), batch_size)]


def minibatches(n, batch_size, seed, epoch):
    if n < 1:
        raise ValueError("n must be >= 1")
    return chunk(permutation(n, seed, epoch), batch_size)


def _check(mlp, grads):
    params, g = mlp.params(), grads.as_list()
    if len(params) != len(g) or any(p.shape != q.shape for p, q in zip(params, g)):
        raise ShapeError("gradient shapes do not match the network")
    if not grads.is_finite():
        raise ValueError("non-finite gradient")
    return params, g


def sgd_step(mlp, grads, lr):
    params, g = _check(mlp, grads)
    return mlp.with_params([p - lr * q for p, q in zip(params, g)])


@dataclass
class AdamState:
    first_moment: list
    second_moment: list
    timestep: int = 0
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps_stab: float = 1e-8

    @classmethod
    def fresh(cls, mlp, lr=2e-4, beta1=0.5, beta2=0.999, eps_stab=1e-8):
        if not lr > 0 or not 0 < beta1 < 1 or not 0 < beta2 < 1 or not eps_stab > 0:
            raise ValueError("invalid Adam hyperparameters")
        zeros = [np.zeros_like(p) for p in mlp.params()]
        return cls([z.copy() for z in zeros], zeros, 0, lr, beta1, beta2, eps_stab)


def adam_step(mlp, grads, state):
    """Bias-corrected Adam update; returns ``(new_mlp, new_state)``."""
    params, g = _check(mlp, grads)
    if len(state.first_moment) != len(params) or any(
            m.shape != p.shape for m, p in zip(state.first_moment, params)):
        raise ShapeError("Adam state does not match the network")
    t = state.timestep + 1
    b1, b2 = state.beta1, state.beta2
    c1, c2 = 1.0 - b1 ** t, 1.0 - b2 ** t
    new_m, new_v, new_p = [], [], []
    for p, q, m, v in zip(params, g, state.first_moment, state.second_moment):
        m = b1 * m + (1.0 - b1) * q
        v = b2 * v + (1.0 - b2) * (q * q)
        new_p.append(p - state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps_stab))
        new_m.append(m)
        new_v.append(v)
    new_state = AdamState(new_m, new_v, t, state.lr, b1, b2, state.eps_stab)
    return mlp.with_params(new_p), new_state
