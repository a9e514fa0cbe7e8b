"""Truncated Fock-space states and operators for one and two bosonic modes.

Every state constructor evaluates the exact infinite-dimensional Fock
amplitudes up to the cutoff, records how much probability fell beyond it
(``tail_mass``) and renormalizes.  Two-mode pure states are stored as a
coefficient matrix ``C`` with ``|psi> = sum_nm C[n, m] |n>|m>``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from scipy import sparse
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

#: Largest dimension the default-cutoff heuristic will hand out.  Beyond this a
#: dense two-mode coefficient matrix no longer fits comfortably in memory and
#: the closed-form paths should be used instead.
MAX_DEFAULT_DIM = 4096

#: Tail mass the default cutoffs aim for.
DEFAULT_TAIL = 1e-10


class DegenerateStateError(ValueError):
    """Raised when a requested superposition is the zero vector."""


class CutoffMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FockCutoff:
    """Photon-number truncation; each mode keeps ``|0>, ..., |n_max>``."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {self.n_max!r}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def dim(self) -> int:
        return self.n_max + 1


CutoffLike = Union[FockCutoff, int, None]


def default_cutoff(mean_photons: float = 0.0) -> FockCutoff:
    """Cutoff keeping the tail mass of states with mean photon number
    ``mean_photons`` below roughly 1e-10.

    Uses ``max(32, ceil(4 mu + 10 sqrt(mu)))``, bumped to the next odd value so
    the per-mode dimension is even and the pseudospin / parity-rotation blocks
    ``{|2n>, |2n+1>}`` all close.
    """
    mu = max(float(mean_photons), 0.0)
    n_max = max(32, math.ceil(4 * mu + 10 * math.sqrt(mu)))
    if n_max % 2 == 0:
        n_max += 1
    if n_max + 1 > MAX_DEFAULT_DIM:
        raise ValueError(
            f"default cutoff for mean photon number {mu:.4g} would need dimension "
            f"{n_max + 1} > {MAX_DEFAULT_DIM}; pass an explicit cutoff or use the "
            "closed-form evaluators"
        )
    return FockCutoff(n_max)


def as_cutoff(cutoff: CutoffLike, mean_photons: float = 0.0) -> FockCutoff:
    if cutoff is None:
        return default_cutoff(mean_photons)
    if isinstance(cutoff, FockCutoff):
        return cutoff
    return FockCutoff(int(cutoff))


@dataclass(frozen=True, eq=False)
class SingleModeState:
    coeffs: np.ndarray
    cutoff: FockCutoff
    tail_mass: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.cutoff.dim,):
            raise ValueError(f"coefficient shape {c.shape} does not match cutoff {self.cutoff.n_max}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def mean_photon_number(self) -> float:
        n = np.arange(self.cutoff.dim)
        return float(np.sum(n * np.abs(self.coeffs) ** 2))

    def overlap(self, other: "SingleModeState") -> complex:
        """``<self|other>``."""
        _check_same_cutoff(self.cutoff, other.cutoff)
        return complex(np.vdot(self.coeffs, other.coeffs))


@dataclass(frozen=True, eq=False)
class TwoModeState:
    coeffs: np.ndarray
    cutoff: FockCutoff
    tail_mass: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        d = self.cutoff.dim
        if c.shape != (d, d):
            raise ValueError(f"coefficient shape {c.shape} does not match cutoff {self.cutoff.n_max}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def schmidt_coefficients(self) -> np.ndarray:
        """Singular values of the coefficient matrix, in decreasing order."""
        return np.linalg.svd(self.coeffs, compute_uv=False)

    def entanglement_entropy(self, base: float = math.e) -> float:
        """Von Neumann entropy of either reduced state."""
        p = self.schmidt_coefficients() ** 2
        p = p[p > 1e-300]
        return float(-np.sum(p * np.log(p)) / math.log(base))

    def overlap(self, other: "TwoModeState") -> complex:
        _check_same_cutoff(self.cutoff, other.cutoff)
        return complex(np.vdot(self.coeffs, other.coeffs))

    def truncate(self, dim: int) -> "TwoModeState":
        """Project onto the first ``dim`` levels of each mode and renormalize."""
        if not 2 <= dim <= self.cutoff.dim:
            raise ValueError(f"dim must lie in [2, {self.cutoff.dim}]")
        c = self.coeffs[:dim, :dim]
        kept = float(np.sum(np.abs(c) ** 2))
        if kept == 0.0:
            raise DegenerateStateError("state has no weight inside the truncated space")
        return TwoModeState(c / math.sqrt(kept), FockCutoff(dim - 1), tail_mass=1.0 - kept)

    @classmethod
    def product(cls, a: SingleModeState, b: SingleModeState) -> "TwoModeState":
        _check_same_cutoff(a.cutoff, b.cutoff)
        return cls(np.outer(a.coeffs, b.coeffs), a.cutoff, tail_mass=1.0 - (1.0 - a.tail_mass) * (1.0 - b.tail_mass))


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Dense single-mode operator at a fixed cutoff.

    ``unitarity_defect`` is ``max_j | ||M e_j|| - 1 |`` for operators that are
    unitary in the untruncated space and ``None`` otherwise.
    """

    matrix: np.ndarray
    cutoff: FockCutoff
    hermitian: bool = False
    unitarity_defect: float | None = field(default=None)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.cutoff.dim
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match cutoff {self.cutoff.n_max}")
        if self.hermitian and hermiticity_defect(m) >= 1e-10:
            raise ValueError("operator flagged hermitian but M - M^dagger is not negligible")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dagger(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T, self.cutoff, self.hermitian, self.unitarity_defect)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            _check_same_cutoff(self.cutoff, other.cutoff)
            return FockOperator(self.matrix @ other.matrix, self.cutoff)
        if isinstance(other, SingleModeState):
            _check_same_cutoff(self.cutoff, other.cutoff)
            return SingleModeState(self.matrix @ other.coeffs, self.cutoff)
        return NotImplemented

    @cached_property
    def sparse(self) -> sparse.csr_matrix | None:
        """CSR copy when at most 5% of the entries are nonzero, else ``None``."""
        nnz = np.count_nonzero(self.matrix)
        return sparse.csr_matrix(self.matrix) if nnz <= 0.05 * self.matrix.size else None

    def expect(self, state: SingleModeState) -> complex:
        _check_same_cutoff(self.cutoff, state.cutoff)
        return complex(np.vdot(state.coeffs, self.matrix @ state.coeffs))

    @classmethod
    def identity(cls, cutoff: CutoffLike) -> "FockOperator":
        cutoff = as_cutoff(cutoff)
        return cls(np.eye(cutoff.dim), cutoff, hermitian=True, unitarity_defect=0.0)


def hermiticity_defect(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def column_norm_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.norm(m, axis=0) - 1.0)))


def _check_same_cutoff(a: FockCutoff, b: FockCutoff) -> None:
    if a != b:
        raise CutoffMismatchError(f"cutoff mismatch: n_max={a.n_max} vs n_max={b.n_max}")


# ---------------------------------------------------------------------------
# amplitudes


def coherent_amplitudes(gamma: complex, dim: int) -> np.ndarray:
    """Exact (untruncated) Fock amplitudes ``e^{-|g|^2/2} g^n / sqrt(n!)``."""
    gamma = complex(gamma)
    n = np.arange(dim)
    if gamma == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * abs(gamma) ** 2 + n * math.log(abs(gamma)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(gamma))


def _finish_single(raw: np.ndarray, cutoff: FockCutoff, exact_norm_sq: float = 1.0) -> SingleModeState:
    kept = float(np.sum(np.abs(raw) ** 2))
    return SingleModeState(raw / math.sqrt(kept), cutoff, tail_mass=max(1.0 - kept / exact_norm_sq, 0.0))


def make_coherent(gamma: complex, cutoff: CutoffLike = None) -> SingleModeState:
    cutoff = as_cutoff(cutoff, abs(gamma) ** 2)
    return _finish_single(coherent_amplitudes(gamma, cutoff.dim), cutoff)


def make_fock(n: int, cutoff: CutoffLike = None) -> SingleModeState:
    cutoff = as_cutoff(cutoff, n)
    if not 0 <= n <= cutoff.n_max:
        raise ValueError(f"number state |{n}> outside cutoff {cutoff.n_max}")
    c = np.zeros(cutoff.dim, dtype=complex)
    c[n] = 1.0
    return SingleModeState(c, cutoff)


def make_cat(gamma: float, parity: str = "even", cutoff: CutoffLike = None) -> SingleModeState:
    """Even (``|g> + |-g>``) or odd (``|g> - |-g>``) cat state, normalized."""
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    gamma = float(gamma)
    cutoff = as_cutoff(cutoff, gamma**2)
    if gamma == 0.0:
        if parity == "odd":
            raise DegenerateStateError("odd cat state with gamma = 0 is the zero vector")
        return make_fock(0, cutoff)
    plus = coherent_amplitudes(gamma, cutoff.dim)
    minus = coherent_amplitudes(-gamma, cutoff.dim)
    sign = 1.0 if parity == "even" else -1.0
    raw = plus + sign * minus
    # zero the opposite-parity entries exactly rather than relying on cancellation
    raw[(1 if parity == "even" else 0)::2] = 0.0
    # || |g> +- |-g> ||^2 = 2 +- 2 exp(-2 g^2)
    exact = 2.0 + sign * 2.0 * math.exp(-2.0 * gamma**2)
    return _finish_single(raw, cutoff, exact)


def tmss_cutoff(r: float, tail: float = DEFAULT_TAIL) -> FockCutoff:
    """Default TMSS cutoff: the photon-number distribution is geometric, so
    its tail ``tanh(r)^(2(n_max+1))`` is pushed below ``tail`` explicitly.

    Capped at :data:`MAX_DEFAULT_DIM` with a warning for very large ``r``.
    """
    base = default_cutoff(min(math.sinh(r) ** 2, MAX_DEFAULT_DIM / 8))
    if r == 0:
        return base
    n_max = math.ceil(math.log(tail) / (2 * math.log(math.tanh(r)))) - 1
    n_max = max(n_max, base.n_max)
    n_max += 1 - n_max % 2
    if n_max + 1 > MAX_DEFAULT_DIM:
        n_max = MAX_DEFAULT_DIM - 1
        warnings.warn(
            f"TMSS with r={r:g} needs more than {MAX_DEFAULT_DIM} levels per mode for tail "
            f"mass {tail:g}; capped, see tail_mass",
            stacklevel=3,
        )
    return FockCutoff(n_max)


def make_tmss(r: float, cutoff: CutoffLike = None) -> TwoModeState:
    """Two-mode squeezed vacuum ``sum_n tanh(r)^n / cosh(r) |n>|n>``."""
    if r < 0:
        raise ValueError("squeezing parameter r must be non-negative")
    cutoff = tmss_cutoff(r) if cutoff is None else as_cutoff(cutoff)
    n = np.arange(cutoff.dim)
    if r == 0:
        diag = (n == 0).astype(float)
    else:
        diag = np.exp(n * math.log(math.tanh(r)) - math.log(math.cosh(r)))
    kept = float(np.sum(diag**2))
    return TwoModeState(np.diag(diag / math.sqrt(kept)), cutoff, tail_mass=max(1.0 - kept, 0.0))


def make_ecs(gamma: float, cutoff: CutoffLike = None) -> TwoModeState:
    """Entangled coherent state ``N (|g>|-g> - |-g>|g>)`` for real ``gamma``."""
    gamma = float(gamma)
    if gamma == 0.0:
        raise DegenerateStateError("entangled coherent state requires gamma != 0")
    cutoff = as_cutoff(cutoff, gamma**2)
    plus = coherent_amplitudes(gamma, cutoff.dim).real
    minus = coherent_amplitudes(-gamma, cutoff.dim).real
    raw = np.outer(plus, minus) - np.outer(minus, plus)
    exact = 2.0 - 2.0 * math.exp(-4.0 * gamma**2)
    kept = float(np.sum(raw**2))
    return TwoModeState(raw / math.sqrt(kept), cutoff, tail_mass=max(1.0 - kept / exact, 0.0))


def make_single_photon_entangled(cutoff: CutoffLike = None) -> TwoModeState:
    """``(|0>|1> - |1>|0>) / sqrt(2)``."""
    cutoff = as_cutoff(cutoff)
    c = np.zeros((cutoff.dim, cutoff.dim))
    c[0, 1] = 1 / math.sqrt(2)
    c[1, 0] = -1 / math.sqrt(2)
    return TwoModeState(c, cutoff)


# ---------------------------------------------------------------------------
# operators


def annihilation(cutoff: CutoffLike) -> FockOperator:
    cutoff = as_cutoff(cutoff)
    return FockOperator(np.diag(np.sqrt(np.arange(1, cutoff.dim)), 1), cutoff)


def number_operator(cutoff: CutoffLike) -> FockOperator:
    cutoff = as_cutoff(cutoff)
    return FockOperator(np.diag(np.arange(cutoff.dim, dtype=float)), cutoff, hermitian=True)


def displacement_padding(alpha: complex, dim: int) -> int:
    """Extra levels needed so that ``D(alpha)|n>`` for every ``n < dim`` lives
    inside the padded space to double precision."""
    reach = (math.sqrt(dim) + abs(alpha) + 7.0) ** 2
    return max(0, int(math.ceil(reach)) - dim)


def displacement_block(alpha: complex, rows: int, cols: int) -> np.ndarray:
    """Exact matrix elements ``<m|D(alpha)|n>`` for ``m < rows``, ``n < cols``.

    Uses ``<m|D|n> = sqrt(n!/m!) alpha^(m-n) exp(-|alpha|^2/2) L_n^(m-n)(|alpha|^2)``
    for ``m >= n`` and the mirrored form with ``-alpha^*`` above the diagonal,
    with the factorial prefactor taken in log space.
    """
    alpha = complex(alpha)
    if alpha == 0:
        return np.eye(rows, cols, dtype=complex)
    x = abs(alpha) ** 2
    m = np.arange(rows)[:, None]
    n = np.arange(cols)[None, :]
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    k = hi - lo
    phase = np.where(m >= n, cmath.phase(alpha), cmath.phase(-alpha.conjugate()))
    log_pre = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - x / 2 + k * math.log(abs(alpha))
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.exp(log_pre + 1j * k * phase) * eval_genlaguerre(lo, k, x)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"displacement matrix elements overflow for alpha={alpha}, size {rows}x{cols}")
    return out


def displacement_matrix(alpha: complex, dim: int, pad: int | None = None, method: str = "laguerre") -> np.ndarray:
    """``D(alpha)`` on ``dim + pad`` levels.

    ``method="laguerre"`` gives exact matrix elements. ``method="expm"``
    exponentiates the generator truncated to ``dim + pad`` levels, whose
    entries near the top of that space are wrong.
    """
    if pad is None:
        pad = displacement_padding(alpha, dim)
    full = dim + pad
    if method == "laguerre":
        return displacement_block(alpha, full, full)
    if method != "expm":
        raise ValueError(f"unknown method {method!r}")
    alpha = complex(alpha)
    if alpha == 0:
        return np.eye(full, dtype=complex)
    a = np.diag(np.sqrt(np.arange(1, full)), 1).astype(complex)
    return expm(alpha * a.conj().T - alpha.conjugate() * a)


def make_displacement(
    alpha: complex,
    cutoff: CutoffLike = None,
    method: str = "expm",
    pad: int | None = 0,
) -> FockOperator:
    """``D(alpha) = exp(alpha a^dagger - alpha^* a)`` at the cutoff.

    By default the generator truncated at the cutoff is exponentiated: the
    result is unitary to rounding but its entries near the top of the space
    are wrong.  ``pad`` exponentiates on a larger space and crops (``None``
    picks a padding that makes every entry exact); ``method="laguerre"``
    returns the exact matrix elements directly.
    """
    alpha = complex(alpha)
    cutoff = as_cutoff(cutoff, abs(alpha) ** 2)
    d = cutoff.dim
    if method == "laguerre":
        m = displacement_block(alpha, d, d)
    else:
        m = displacement_matrix(alpha, d, pad, method)[:d, :d]
    m = np.ascontiguousarray(m)
    return FockOperator(m, cutoff, unitarity_defect=column_norm_defect(m))


def expectation(
    state: TwoModeState,
    op1: FockOperator,
    op2: FockOperator,
    hermitian: bool = True,
) -> float | complex:
    """``<psi| op1 (x) op2 |psi>``.

    With ``hermitian=True`` (the default) both factors must be hermitian and
    the real part is returned after checking the imaginary residue is below
    1e-9.
    """
    _check_same_cutoff(state.cutoff, op1.cutoff)
    _check_same_cutoff(state.cutoff, op2.cutoff)
    c = state.coeffs
    s1, s2 = op1.sparse, op2.sparse
    left = s1 @ c if s1 is not None else op1.matrix @ c
    both = (s2 @ left.T).T if s2 is not None else left @ op2.matrix.T
    value = complex(np.sum(c.conj() * both))
    if not hermitian:
        return value
    for op in (op1, op2):
        if not op.hermitian and hermiticity_defect(op.matrix) >= 1e-10:
            raise ValueError("hermitian expectation requested for a non-hermitian operator")
    if abs(value.imag) >= 1e-9:
        raise ValueError(f"imaginary residue {value.imag:.3e} in a hermitian expectation value")
    return value.real
