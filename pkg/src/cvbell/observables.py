"""Measurement operators: pseudospin, Gisin-Peres, displaced parity and the
projectors used in Clauser-Horne tests."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import binom, eval_genlaguerre, gammaln

from .fock import (
    CutoffLike,
    FockCutoff,
    FockOperator,
    as_cutoff,
    coherent_amplitudes,
    column_norm_defect,
    displacement_block,
    displacement_padding,
    make_cat,
    make_displacement,
)


@dataclass(frozen=True)
class PseudospinSetting:
    theta: float
    phi: float = 0.0


@dataclass(frozen=True)
class DisplacementSetting:
    alpha: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))


@dataclass(frozen=True)
class ProjectorSetting:
    theta: float


def _theta(setting) -> float:
    return float(getattr(setting, "theta", setting))


def _alpha(setting) -> complex:
    return complex(getattr(setting, "alpha", setting))


def _hermitian(m: np.ndarray, cutoff: FockCutoff) -> FockOperator:
    m = 0.5 * (m + m.conj().T)
    return FockOperator(m, cutoff, hermitian=True)


# ---------------------------------------------------------------------------
# parity-structured operators (exact at any cutoff)


def parity_operator(cutoff: CutoffLike) -> FockOperator:
    """``sum_n |2n><2n| - |2n+1><2n+1|``."""
    cutoff = as_cutoff(cutoff)
    signs = np.where(np.arange(cutoff.dim) % 2 == 0, 1.0, -1.0)
    return FockOperator(np.diag(signs), cutoff, hermitian=True, unitarity_defect=0.0)


def even_projector(cutoff: CutoffLike) -> FockOperator:
    cutoff = as_cutoff(cutoff)
    return FockOperator(np.diag((np.arange(cutoff.dim) % 2 == 0).astype(float)), cutoff, hermitian=True)


def odd_projector(cutoff: CutoffLike) -> FockOperator:
    cutoff = as_cutoff(cutoff)
    return FockOperator(np.diag((np.arange(cutoff.dim) % 2 == 1).astype(float)), cutoff, hermitian=True)


def s_z(cutoff: CutoffLike) -> FockOperator:
    """Pseudospin z: +1 on odd, -1 on even number states."""
    cutoff = as_cutoff(cutoff)
    signs = np.where(np.arange(cutoff.dim) % 2 == 1, 1.0, -1.0)
    return FockOperator(np.diag(signs), cutoff, hermitian=True)


def s_minus(cutoff: CutoffLike) -> FockOperator:
    """``sum_n |2n><2n+1|``; pairs past the cutoff are dropped."""
    cutoff = as_cutoff(cutoff)
    m = np.zeros((cutoff.dim, cutoff.dim))
    k = np.arange(0, cutoff.dim - 1, 2)
    m[k, k + 1] = 1.0
    return FockOperator(m, cutoff)


def s_plus(cutoff: CutoffLike) -> FockOperator:
    return s_minus(cutoff).dagger


def s_x(cutoff: CutoffLike) -> FockOperator:
    cutoff = as_cutoff(cutoff)
    m = s_minus(cutoff).matrix
    return FockOperator(m + m.T, cutoff, hermitian=True)


def pseudospin(setting: PseudospinSetting, cutoff: CutoffLike) -> FockOperator:
    """``s_z cos(theta) + sin(theta) (e^{i phi} s_- + e^{-i phi} s_+)``.

    Squares to the identity whenever the per-mode dimension is even.
    """
    cutoff = as_cutoff(cutoff)
    theta = float(setting.theta)
    phi = float(getattr(setting, "phi", 0.0))
    sm = s_minus(cutoff).matrix
    m = math.cos(theta) * s_z(cutoff).matrix + math.sin(theta) * (
        np.exp(1j * phi) * sm + np.exp(-1j * phi) * sm.T
    )
    return _hermitian(m, cutoff)


def gisin_peres(N: int, theta: float, convention: str = "pseudospin") -> FockOperator:
    """Gisin-Peres observable ``Gamma_x sin(theta) + Gamma_z cos(theta) + E``
    on an ``N``-dimensional space.

    The default ``convention="pseudospin"`` uses ``Gamma_z`` blocks
    ``diag(-1, 1)``, so that for even ``N`` the result coincides entrywise with
    ``pseudospin(theta, phi=0)``. ``convention="pauli"`` uses ordinary
    ``sigma_z = diag(1, -1)`` blocks. The two are related by ``theta -> pi - theta``.
    """
    if N < 2:
        raise ValueError("Gisin-Peres observable needs N >= 2")
    if convention not in ("pauli", "pseudospin"):
        raise ValueError("convention must be 'pauli' or 'pseudospin'")
    zsign = 1.0 if convention == "pauli" else -1.0
    m = np.zeros((N, N))
    for k in range(0, N - 1, 2):
        m[k, k] = zsign * math.cos(theta)
        m[k + 1, k + 1] = -zsign * math.cos(theta)
        m[k, k + 1] = m[k + 1, k] = math.sin(theta)
    if N % 2 == 1:
        m[N - 1, N - 1] = 1.0
    return FockOperator(m, FockCutoff(N - 1), hermitian=True)


def parity_rotation(theta: float, cutoff: CutoffLike) -> FockOperator:
    """Block rotation ``U(theta)``::

        U|2n>   = cos(theta)|2n>   - sin(theta)|2n+1>
        U|2n+1> = sin(theta)|2n>   + cos(theta)|2n+1>

    An unpaired top level (odd dimension) is left fixed so the matrix stays
    exactly orthogonal.
    """
    cutoff = as_cutoff(cutoff)
    c, s = math.cos(theta), math.sin(theta)
    m = np.eye(cutoff.dim)
    k = np.arange(0, cutoff.dim - 1, 2)
    m[k, k] = c
    m[k + 1, k + 1] = c
    m[k + 1, k] = -s
    m[k, k + 1] = s
    return FockOperator(m, cutoff, unitarity_defect=0.0)


def chi_projector(theta: float, cutoff: CutoffLike) -> FockOperator:
    """Projector ``sum_n U(theta)|2n><2n|U(theta)^dagger`` onto the rotated even subspace.

    Within each block this is ``cos^2 Pi+ + sin^2 Pi- - sin cos s_x``.
    """
    cutoff = as_cutoff(cutoff)
    c, s = math.cos(theta), math.sin(theta)
    m = np.zeros((cutoff.dim, cutoff.dim))
    k = np.arange(0, cutoff.dim - 1, 2)
    m[k, k] = c * c
    m[k + 1, k + 1] = s * s
    m[k, k + 1] = m[k + 1, k] = -s * c
    if cutoff.dim % 2 == 1:
        # unpaired top level is even and left fixed by U
        m[-1, -1] = 1.0
    return FockOperator(m, cutoff, hermitian=True)


# ---------------------------------------------------------------------------
# displaced-parity (BW) observables


def _check_method(method: str) -> None:
    if method not in ("expm", "exact"):
        raise ValueError("method must be 'expm' or 'exact'")


def bw_parity(setting: DisplacementSetting, cutoff: CutoffLike = None, method: str = "expm") -> FockOperator:
    """Displaced parity ``D(alpha) Pi D(alpha)^dagger``.

    ``method="expm"`` conjugates with the truncated-generator displacement, so
    the result is an exact involution at the cutoff but its entries near the
    top are off. ``method="exact"`` returns the exact matrix elements of the
    untruncated operator (no longer an involution once cropped); expectation
    values in a truncated state are then exact.
    """
    _check_method(method)
    alpha = _alpha(setting)
    cutoff = as_cutoff(cutoff, abs(alpha) ** 2)
    if method == "expm":
        d = make_displacement(alpha, cutoff).matrix
    else:
        d = displacement_block(alpha, cutoff.dim, cutoff.dim + displacement_padding(alpha, cutoff.dim))
    signs = 1.0 - 2.0 * (np.arange(d.shape[1]) % 2)
    return _hermitian((d * signs) @ d.conj().T, cutoff)


def bw_ch_projector(setting: DisplacementSetting, cutoff: CutoffLike = None, method: str = "expm") -> FockOperator:
    """Displaced-vacuum projector ``D(alpha)|0><0|D(alpha)^dagger``; ``method``
    as in :func:`bw_parity` (``"exact"`` uses the coherent amplitudes)."""
    _check_method(method)
    alpha = _alpha(setting)
    cutoff = as_cutoff(cutoff, abs(alpha) ** 2)
    if method == "expm":
        col = make_displacement(alpha, cutoff).matrix[:, 0]
    else:
        col = coherent_amplitudes(alpha, cutoff.dim)
    return _hermitian(np.outer(col, col.conj()), cutoff)


def ch_projector(setting: ProjectorSetting, cutoff: CutoffLike = 1) -> FockOperator:
    """``|theta><theta|`` with ``|theta> = cos(theta)|0> + sin(theta)|1>``."""
    cutoff = as_cutoff(cutoff)
    theta = _theta(setting)
    v = np.zeros(cutoff.dim)
    v[0], v[1] = math.cos(theta), math.sin(theta)
    return FockOperator(np.outer(v, v), cutoff, hermitian=True)


# ---------------------------------------------------------------------------
# number-state parity under displacement


def generalized_laguerre(n: int, a: int, x: float) -> float:
    """``L_n^{(a)}(x)`` for integer order ``a``, including negative ``a``
    (where scipy's evaluator returns nan).

    Negative orders use ``L_n^{(-m)}(x) = (-x)^m (n-m)!/n! L_{n-m}^{(m)}(x)``.
    """
    if n < 0:
        return 0.0
    if a > -1:
        return float(eval_genlaguerre(n, a, x))
    m = -int(a)
    if m > n:
        # n + a < 0: plain explicit sum with generalized binomials
        i = np.arange(n + 1)
        return float(np.sum((-1.0) ** i * binom(n + a, n - i) * x**i / np.exp(gammaln(i + 1))))
    return float((-x) ** m * math.exp(gammaln(n - m + 1) - gammaln(n + 1)) * eval_genlaguerre(n - m, m, x))


def _parity_series(n: int, x: float, odd_degree_offset: int) -> float:
    # Sum over intermediate number states k of (-1)^k |<k|D|n>|^2 written with
    # L_k^{(n-k)}; odd_degree_offset=1 shifts the odd-term degree to 2k+2.
    if x == 0.0:
        return (-1.0) ** n
    total, k = 0.0, 0
    log_pref = -x + n * math.log(x) - math.lgamma(n + 1)
    while True:
        even = math.exp(math.lgamma(2 * k + 1) - 2 * k * math.log(x) + log_pref) * generalized_laguerre(2 * k, n - 2 * k, x) ** 2
        odd = math.exp(math.lgamma(2 * k + 2) - (2 * k + 1) * math.log(x) + log_pref) * generalized_laguerre(
            2 * k + 1 + odd_degree_offset, n - 2 * k - 1, x
        ) ** 2
        total += even - odd
        k += 1
        if 2 * k > n + 8 and 2 * k > 4 * x + 40:
            break
        if k > 200:
            break
    return total


def parity_expectation_number_state(
    n: int,
    abs_alpha: float,
    method: str = "matrix",
    cutoff: CutoffLike = None,
) -> float:
    """``P(n, |alpha|) = <n| Pi(alpha) |n>``.

    Methods
    -------
    ``"matrix"``
        ``<n|D Pi D^dagger|n>`` on a truncated space (the reference path).
    ``"closed"``
        ``(-1)^n exp(-2|alpha|^2) L_n(4|alpha|^2)``, from ``D Pi D^dagger = D(2 alpha) Pi``.
    ``"series"``
        Laguerre series with odd-term degree ``2k+1``.
    ``"series_shifted"``
        The same series with odd-term degree ``2k+2``; kept only to document
        that it disagrees with the other three.
    """
    if n < 0:
        raise ValueError("number state index must be non-negative")
    x = float(abs_alpha) ** 2
    if method == "matrix":
        if cutoff is None:
            # D^dagger|n> has mean photon number n + |alpha|^2
            cutoff = as_cutoff(None, 2 * (n + x) + 2 * math.sqrt(n * x) + 8)
        cutoff = as_cutoff(cutoff)
        if n > cutoff.n_max:
            raise ValueError("number state beyond cutoff")
        d = make_displacement(-complex(abs_alpha), cutoff, method="expm", pad=None).matrix[:, n]
        signs = parity_operator(cutoff).matrix.diagonal().real
        return float(np.sum(signs * np.abs(d) ** 2))
    if method == "closed":
        lag = generalized_laguerre(n, 0, 4 * x)
        return (-1.0) ** n * math.exp(-2 * x) * lag
    if method == "series":
        return _parity_series(n, x, 0)
    if method == "series_shifted":
        return _parity_series(n, x, 1)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# cat-qubit rotation


def cat_rotation(theta: float, gamma: float, cutoff: CutoffLike = None) -> FockOperator:
    """Ideal rotation ``R_x(theta)`` on the ``{|e>, |d>}`` cat basis,
    identity on the orthogonal complement::

        R|e> = cos(theta)|e> + i sin(theta)|d>
        R|d> = i sin(theta)|e> + cos(theta)|d>
    """
    cutoff = as_cutoff(cutoff, gamma**2)
    e = make_cat(gamma, "even", cutoff).coeffs
    d = make_cat(gamma, "odd", cutoff).coeffs
    basis = np.stack([e, d], axis=1)
    rot = np.array([[math.cos(theta), 1j * math.sin(theta)], [1j * math.sin(theta), math.cos(theta)]])
    m = np.eye(cutoff.dim, dtype=complex) + basis @ (rot - np.eye(2)) @ basis.conj().T
    return FockOperator(m, cutoff, unitarity_defect=column_norm_defect(m))


def cat_rotation_fidelity(
    gamma: float,
    alpha_i: float,
    cutoff: CutoffLike = None,
    parity: str = "even",
) -> float:
    """``|<c| D(i alpha_i)^dagger R_x(2 gamma alpha_i) |c>|^2`` for the even
    (``parity="even"``) or odd cat ``|c>``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    cutoff = as_cutoff(cutoff, (abs(gamma) + abs(alpha_i)) ** 2)
    cat = make_cat(gamma, parity, cutoff).coeffs
    displaced = make_displacement(1j * alpha_i, cutoff).matrix @ cat
    rotated = cat_rotation(2 * gamma * alpha_i, gamma, cutoff).matrix @ cat
    return float(abs(np.vdot(displaced, rotated)) ** 2)
