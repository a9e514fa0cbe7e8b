"""Wigner and Husimi Q functions of the two-mode states, in closed form and
from truncated state vectors.

Closed forms are vectorized over ``alpha`` and ``beta`` (numpy broadcasting).
Normalizations: ``(pi^2/4) W(alpha, beta) = <Pi_1(alpha) Pi_2(beta)>`` and
``Q`` integrates to one over both phase planes.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .fock import FockOperator, TwoModeState, coherent_amplitudes, expectation
from .observables import bw_ch_projector, bw_parity


@dataclass(frozen=True)
class PhasePoint:
    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))


def _point_args(fn):
    """Let a two-mode closed form be called as ``fn(PhasePoint, param)`` as
    well as ``fn(alpha, beta, param)``."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        if args and isinstance(args[0], PhasePoint):
            args = (args[0].alpha, args[0].beta) + args[1:]
        return fn(*args, **kwargs)

    return wrapper


def _state_point_args(fn):
    """Same for the matrix evaluators, which also accept ``fn(PhasePoint, state)``."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        if args and isinstance(args[0], PhasePoint):
            p, state = args[0], args[1]
            return fn(state, p.alpha, p.beta, *args[2:], **kwargs)
        if len(args) == 2 and isinstance(args[1], PhasePoint):
            return fn(args[0], args[1].alpha, args[1].beta, **kwargs)
        return fn(*args, **kwargs)

    return wrapper


def _ecs_norm_sq(gamma: float) -> float:
    if gamma == 0:
        raise ValueError("entangled coherent state requires gamma != 0")
    return 1.0 / (2.0 - 2.0 * math.exp(-4.0 * gamma**2))


def _cplx(z):
    return np.asarray(z, dtype=complex)


# ---------------------------------------------------------------------------
# Wigner functions


@_point_args
def wigner_tmss(alpha, beta, r: float):
    if r < 0:
        raise ValueError("squeezing parameter r must be non-negative")
    a, b = _cplx(alpha), _cplx(beta)
    ab = a * b
    exponent = -2 * math.cosh(2 * r) * (np.abs(a) ** 2 + np.abs(b) ** 2) + 4 * math.sinh(2 * r) * ab.real
    return 4 / math.pi**2 * np.exp(exponent)


@_point_args
def wigner_ecs(alpha, beta, gamma: float):
    """Wigner function of ``N(|g>|-g> - |-g>|g>)`` for real ``gamma``.

    The two interference terms are complex conjugates of each other, so their
    sum is twice the real part of one.
    """
    gamma = float(gamma)
    n2 = _ecs_norm_sq(gamma)
    a, b = _cplx(alpha), _cplx(beta)
    g = gamma
    direct = np.exp(-2 * np.abs(a - g) ** 2 - 2 * np.abs(b + g) ** 2) + np.exp(
        -2 * np.abs(a + g) ** 2 - 2 * np.abs(b - g) ** 2
    )
    cross = np.exp(-2 * (a - g) * (a.conj() + g) - 2 * (b + g) * (b.conj() - g) - 4 * g**2)
    return 4 * n2 / math.pi**2 * (direct - 2 * cross.real)


@_state_point_args
def wigner_from_state(state: TwoModeState, alpha: complex, beta: complex) -> float:
    """``(4/pi^2) <Pi_1(alpha) Pi_2(beta)>`` on the truncated state."""
    c = state.cutoff
    return 4 / math.pi**2 * expectation(state, bw_parity(alpha, c, "exact"), bw_parity(beta, c, "exact"))


# ---------------------------------------------------------------------------
# Q functions


@_state_point_args
def q_two_mode(state: TwoModeState, alpha: complex, beta: complex) -> float:
    """``|<alpha|<beta|psi>|^2 / pi^2`` from the state's Fock amplitudes."""
    d = state.cutoff.dim
    a = coherent_amplitudes(alpha, d)
    b = coherent_amplitudes(beta, d)
    amp = a.conj() @ state.coeffs @ b.conj()
    return float(abs(amp) ** 2 / math.pi**2)


@_point_args
def q_tmss(alpha, beta, r: float):
    if r < 0:
        raise ValueError("squeezing parameter r must be non-negative")
    a, b = _cplx(alpha), _cplx(beta)
    exponent = -np.abs(a) ** 2 - np.abs(b) ** 2 + 2 * math.tanh(r) * (a * b).real
    return np.exp(exponent) / (math.pi**2 * math.cosh(r) ** 2)


@_point_args
def q_ecs(alpha, beta, gamma: float):
    gamma = float(gamma)
    n2 = _ecs_norm_sq(gamma)
    a, b = _cplx(alpha), _cplx(beta)
    g = gamma
    direct = np.exp(-np.abs(a - g) ** 2 - np.abs(b + g) ** 2) + np.exp(-np.abs(a + g) ** 2 - np.abs(b - g) ** 2)
    cross = np.exp(-(a - g) * (a.conj() + g) - (b + g) * (b.conj() - g) - 4 * g**2)
    return n2 / math.pi**2 * (direct - 2 * cross.real)


@_point_args
def q_single_photon(alpha, beta):
    """Q function of ``(|0>|1> - |1>|0>)/sqrt(2)``."""
    a, b = _cplx(alpha), _cplx(beta)
    return np.exp(-np.abs(a) ** 2 - np.abs(b) ** 2) * np.abs(a - b) ** 2 / (2 * math.pi**2)


def q_marginal_tmss(alpha, r: float):
    """Single-mode Q of the thermal reduced state with mean ``sinh^2 r``."""
    a = _cplx(alpha)
    ch2 = math.cosh(r) ** 2
    return np.exp(-np.abs(a) ** 2 / ch2) / (math.pi * ch2)


def q_marginal_ecs(alpha, gamma: float):
    """Q of either reduced state of the ECS (both modes share it)."""
    gamma = float(gamma)
    n2 = _ecs_norm_sq(gamma)
    a = _cplx(alpha)
    g = gamma
    direct = np.exp(-np.abs(a - g) ** 2) + np.exp(-np.abs(a + g) ** 2)
    cross = 2 * np.exp(-np.abs(a) ** 2 - 3 * g**2) * np.cos(2 * g * a.imag)
    return n2 / math.pi * (direct - cross)


def q_marginal_single_photon(alpha):
    a = _cplx(alpha)
    return np.exp(-np.abs(a) ** 2) * (1 + np.abs(a) ** 2) / (2 * math.pi)


def q_marginals(state: TwoModeState, alpha: complex, mode: int = 1) -> float:
    """Marginal Q of ``mode`` (1 or 2) at ``alpha``, as ``<zeta(alpha)>/pi``."""
    c = state.cutoff
    zeta = bw_ch_projector(alpha, c, "exact")
    ident = FockOperator.identity(c)
    if mode == 1:
        return expectation(state, zeta, ident) / math.pi
    if mode == 2:
        return expectation(state, ident, zeta) / math.pi
    raise ValueError("mode must be 1 or 2")


def q_marginal_from_state(state: TwoModeState, alpha: complex, mode: int = 1) -> float:
    """Same as :func:`q_marginals` via coherent overlaps, avoiding the matrix exponential."""
    a = coherent_amplitudes(alpha, state.cutoff.dim)
    c = state.coeffs if mode == 1 else state.coeffs.T
    v = a.conj() @ c
    return float(np.vdot(v, v).real / math.pi)
