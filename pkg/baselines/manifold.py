"""
Manifold-optimisation hybrid design (alternating minimisation).

Given unconstrained per-subchannel targets T[k] (from the SVD of the channel
estimate), alternate an exact least-squares digital step
B[k] = X^+ T[k] with a Riemannian conjugate-gradient pass over the
constant-modulus analog matrix X, minimising sum_k ||T[k] - X B[k]||_F^2.
"""
import logging
import math
from dataclasses import dataclass, field

import torch

from beamformer.normalization import scale_to_power
from beamformer.types import HybridBeamformer, HybridCombiner
from core.seeding import STREAM_BASELINE, torch_generator
from core.tensors import COMPLEX_DTYPE, REAL_DTYPE, hermitian
from .digital import svd_streams

logger = logging.getLogger(__name__)

DEFAULT_ITERS = 200
DEFAULT_TOL = 1e-6
INNER_ITERS = 10
ARMIJO_SLOPE = 1e-4
MAX_BACKTRACKS = 30


@dataclass
class MoResult:
    beamformer: HybridBeamformer
    combiner: HybridCombiner
    converged: bool
    history: dict = field(default_factory=dict)


def _inner(a, b):
    return torch.real((a.conj() * b).sum()).item()


def _objective(T, X, B):
    return (T - X @ B).abs().pow(2).sum().item()


def _tangent(z, X, modulus):
    """Project z onto the tangent space of the constant-modulus manifold at X."""
    return z - torch.real(z * X.conj()) * X / modulus ** 2


def _retract(X, modulus):
    return modulus * X / X.abs()


def _riemannian_cg(T, X, B, modulus, iterations):
    def cost(point):
        return _objective(T, point, B)

    def gradient(point):
        euclidean = -2.0 * ((T - point @ B) @ hermitian(B)).sum(dim=0)
        return _tangent(euclidean, point, modulus)

    value = cost(X)
    grad = gradient(X)
    direction = -grad
    for _ in range(iterations):
        slope = _inner(grad, direction)
        if slope >= 0:
            direction = -grad
            slope = -_inner(grad, grad)
        if slope == 0:
            break
        step = 1.0
        for _ in range(MAX_BACKTRACKS):
            candidate = _retract(X + step * direction, modulus)
            candidate_value = cost(candidate)
            if candidate_value <= value + ARMIJO_SLOPE * step * slope:
                break
            step *= 0.5
        else:
            break
        previous_grad = _tangent(grad, candidate, modulus)
        previous_direction = _tangent(direction, candidate, modulus)
        X, value = candidate, candidate_value
        new_grad = gradient(X)
        beta = max(0.0, _inner(new_grad, new_grad - previous_grad) / max(_inner(grad, grad), 1e-300))
        grad = new_grad
        direction = -grad + beta * previous_direction
    return X


def alternating_minimization(T, NRF, iters=DEFAULT_ITERS, tol=DEFAULT_TOL, generator=None):
    """
    T: (K, N, Ns) targets. Returns (X, B, objective history, converged); the
    history holds the objective after every digital least-squares step.
    """
    N = T.shape[-2]
    modulus = 1.0 / math.sqrt(N)
    phases = torch.rand(N, NRF, generator=generator, dtype=REAL_DTYPE) * 2 * math.pi
    X = torch.polar(torch.full_like(phases, modulus), phases).to(COMPLEX_DTYPE)
    history = []
    converged = False
    for _ in range(iters):
        B = torch.linalg.pinv(X) @ T
        history.append(_objective(T, X, B))
        if len(history) > 1 and (history[-2] - history[-1]) <= tol * max(history[-2], 1e-300):
            converged = True
            break
        X = _riemannian_cg(T, X, B, modulus, INNER_ITERS)
    else:
        B = torch.linalg.pinv(X) @ T
        history.append(_objective(T, X, B))
    return X, B, history, converged


def mo_hybrid(H_est, config, iters=DEFAULT_ITERS, tol=DEFAULT_TOL, generator=None):
    """Hybrid beamformer and combiner for one channel estimate (K, Nr, Nt)."""
    if generator is None:
        generator = torch_generator(config.seed, STREAM_BASELINE)
    F_opt, W_opt = svd_streams(H_est, config.Ns)
    F_RF, F_BB, f_history, f_converged = alternating_minimization(F_opt, config.NRFt, iters, tol, generator)
    W_RF, W_BB, w_history, w_converged = alternating_minimization(W_opt, config.NRFr, iters, tol, generator)
    converged = f_converged and w_converged
    if not converged:
        logger.info("MO stopped after %d iterations without meeting tol=%g", iters, tol)
    return MoResult(
        beamformer=scale_to_power(HybridBeamformer(F_RF=F_RF, F_BB=F_BB), config.Ns),
        combiner=HybridCombiner(W_RF=W_RF, W_BB=W_BB),
        converged=converged,
        history={'beamformer': f_history, 'combiner': w_history},
    )
