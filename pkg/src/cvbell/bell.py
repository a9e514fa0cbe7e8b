"""Bell-CHSH and Bell-CH functionals.

Every functional comes in two flavours:

* a closed-form path taking ``(kind, param, settings)`` where ``kind`` is
  ``"tmss"`` (param = squeezing ``r``), ``"ecs"`` (param = real amplitude
  ``gamma``) or ``"single_photon"`` (param ignored), and
* a matrix path taking a truncated :class:`~cvbell.fock.TwoModeState`.

Setting order follows the usual CHSH convention ``(a, a', b, b')``::

    B    = E(a,b) + E(a,b') + E(a',b) - E(a',b')
    B_CH = P(a,b) + P(a,b') + P(a',b) - P(a',b') - P_1(a) - P_2(b)
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.special import gammaln

from . import phase_space as ps
from .fock import FockOperator, TwoModeState, expectation
from .observables import (
    DisplacementSetting,
    ProjectorSetting,
    PseudospinSetting,
    bw_ch_projector,
    bw_parity,
    ch_projector,
    chi_projector,
    gisin_peres,
    pseudospin,
)

CIRELSON = 2 * math.sqrt(2)
CH_UPPER = (math.sqrt(2) - 1) / 2
CH_LOWER = -(math.sqrt(2) + 1) / 2

CHSH_FORMALISMS = ("pseudospin", "bw", "gbw", "gisin_peres")
CH_FORMALISMS = ("ch_qubit", "ch_q", "ch_parity")
FORMALISMS = CHSH_FORMALISMS + CH_FORMALISMS
STATE_KINDS = ("tmss", "ecs", "single_photon")


class SettingKindError(TypeError):
    pass


class BoundViolationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class BellSettings:
    a: Any
    a_prime: Any
    b: Any
    b_prime: Any

    def __post_init__(self):
        kinds = {type(x) for x in self}
        if len(kinds) != 1:
            raise SettingKindError(f"mixed setting kinds: {sorted(k.__name__ for k in kinds)}")

    def __iter__(self):
        return iter((self.a, self.a_prime, self.b, self.b_prime))

    @property
    def kind(self) -> type:
        return type(self.a)

    @classmethod
    def angles(cls, a: float, a_prime: float, b: float, b_prime: float) -> "BellSettings":
        return cls(*(ProjectorSetting(float(t)) for t in (a, a_prime, b, b_prime)))

    @classmethod
    def displacements(cls, a: complex, a_prime: complex, b: complex, b_prime: complex) -> "BellSettings":
        return cls(*(DisplacementSetting(z) for z in (a, a_prime, b, b_prime)))

    @classmethod
    def spins(cls, *pairs: tuple[float, float]) -> "BellSettings":
        """Four ``(theta, phi)`` pairs in the order ``a, a', b, b'``."""
        return cls(*(PseudospinSetting(float(t), float(p)) for t, p in pairs))

    def to_dict(self) -> dict:
        out = {}
        for name, s in zip(("a", "a_prime", "b", "b_prime"), self):
            if isinstance(s, DisplacementSetting):
                out[name] = {"re": s.alpha.real, "im": s.alpha.imag}
            elif isinstance(s, PseudospinSetting):
                out[name] = {"theta": s.theta, "phi": s.phi}
            else:
                out[name] = {"theta": s.theta}
        return out


@dataclass
class BellResult:
    value: float
    settings: BellSettings | None
    formalism: str
    diagnostics: dict = field(default_factory=dict)

    def check_bounds(self, tol: float = 1e-6) -> None:
        """Raise :class:`BoundViolationError` when the value leaves the quantum range."""
        if self.formalism in CHSH_FORMALISMS:
            if abs(self.value) > CIRELSON + tol:
                raise BoundViolationError(f"|B| = {abs(self.value):.10f} exceeds 2 sqrt 2")
        elif self.formalism in CH_FORMALISMS:
            if not CH_LOWER - tol <= self.value <= CH_UPPER + tol:
                raise BoundViolationError(f"B_CH = {self.value:.10f} outside [-(1+sqrt2)/2, (sqrt2-1)/2]")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "formalism": self.formalism,
            "settings": None if self.settings is None else self.settings.to_dict(),
            "diagnostics": self.diagnostics,
        }


def _require(s: BellSettings, kind: type) -> None:
    if not isinstance(s, BellSettings):
        raise SettingKindError("expected BellSettings")
    if s.kind is not kind and not (kind is ProjectorSetting and hasattr(s.a, "theta")):
        raise SettingKindError(f"expected {kind.__name__} settings, got {s.kind.__name__}")


def chsh_combination(corr: Callable[[Any, Any], float], s: BellSettings) -> float:
    return corr(s.a, s.b) + corr(s.a, s.b_prime) + corr(s.a_prime, s.b) - corr(s.a_prime, s.b_prime)


def ch_combination(
    joint: Callable[[Any, Any], float],
    marginal1: Callable[[Any], float],
    marginal2: Callable[[Any], float],
    s: BellSettings,
) -> float:
    return chsh_combination(joint, s) - marginal1(s.a) - marginal2(s.b)


def _check_kind(kind: str, param: float, allowed: Sequence[str] = ("tmss", "ecs")) -> None:
    if kind not in allowed:
        raise ValueError(f"state kind must be one of {tuple(allowed)}, got {kind!r}")
    if kind == "tmss" and not param >= 0:
        raise ValueError("squeezing parameter r must be non-negative")
    if kind == "ecs" and (param == 0 or not np.isfinite(param)):
        raise ValueError("ECS amplitude gamma must be non-zero and finite")


# ---------------------------------------------------------------------------
# linear-observable tables


class CorrelationTable:
    """Exact expectation values for observables that are linear combinations
    of a fixed operator basis.

    ``T[i, j] = <B_i (x) B_j>`` is computed once with
    :func:`~cvbell.fock.expectation`; afterwards ``<X (x) Y>`` for
    ``X = sum c_i B_i`` and ``Y = sum d_j B_j`` is ``c @ T @ d``.
    """

    def __init__(self, state: TwoModeState, basis: Sequence[FockOperator]):
        self.state = state
        n = len(basis)
        self.table = np.empty((n, n))
        for i, x in enumerate(basis):
            for j, y in enumerate(basis):
                self.table[i, j] = expectation(state, x, y)

    def __call__(self, c1: np.ndarray, c2: np.ndarray) -> float:
        return float(c1 @ self.table @ c2)


def _pseudospin_coeffs(s: PseudospinSetting) -> np.ndarray:
    t, p = s.theta, s.phi
    return np.array([math.cos(t), math.sin(t) * math.cos(p), math.sin(t) * math.sin(p)])


def pseudospin_table(state: TwoModeState) -> CorrelationTable:
    c = state.cutoff
    basis = [
        pseudospin(PseudospinSetting(0.0, 0.0), c),  # s_z
        pseudospin(PseudospinSetting(math.pi / 2, 0.0), c),  # s_x
        pseudospin(PseudospinSetting(math.pi / 2, math.pi / 2), c),  # s_y
    ]
    return CorrelationTable(state, basis)


def _gp_coeffs(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta), 1.0])


def gisin_peres_table(state: TwoModeState, convention: str = "pseudospin") -> CorrelationTable:
    n, c = state.cutoff.dim, state.cutoff
    a0 = gisin_peres(n, 0.0, convention).matrix
    api = gisin_peres(n, math.pi, convention).matrix
    e = 0.5 * (a0 + api)
    gz = 0.5 * (a0 - api)
    gx = gisin_peres(n, math.pi / 2, convention).matrix - e
    return CorrelationTable(state, [FockOperator(m, c, hermitian=True) for m in (gz, gx, e)])


def _chi_coeffs(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([c * c, s * s, s * c, 0.0])


_UNIT4 = np.array([0.0, 0.0, 0.0, 1.0])


def chi_table(state: TwoModeState) -> CorrelationTable:
    c = state.cutoff
    x0 = chi_projector(0.0, c).matrix
    x1 = chi_projector(math.pi / 2, c).matrix
    z = 2 * chi_projector(math.pi / 4, c).matrix - x0 - x1
    basis = [FockOperator(m, c, hermitian=True) for m in (x0, x1, z)] + [FockOperator.identity(c)]
    return CorrelationTable(state, basis)


# ---------------------------------------------------------------------------
# CHSH: pseudospin


def chsh_pseudospin(state: TwoModeState, s: BellSettings, table: CorrelationTable | None = None) -> float:
    """CHSH value with pseudospin observables, from the truncated state."""
    _require(s, PseudospinSetting)
    table = table or pseudospin_table(state)
    return chsh_combination(lambda x, y: table(_pseudospin_coeffs(x), _pseudospin_coeffs(y)), s)


def chsh_pseudospin_operators(state: TwoModeState, s: BellSettings) -> float:
    """Same as :func:`chsh_pseudospin` but builds every operator explicitly."""
    _require(s, PseudospinSetting)
    c = state.cutoff
    return chsh_combination(lambda x, y: expectation(state, pseudospin(x, c), pseudospin(y, c)), s)


def pseudospin_correlation(kind: str, param: float, t1: float, p1: float, t2: float, p2: float) -> float:
    """Closed-form ``<a.s_1 (x) b.s_2>``.

    TMSS: ``cos t1 cos t2 + tanh(2r) sin t1 sin t2 cos(p1 + p2)``.
    ECS:  ``-cos t1 cos t2 - K(gamma) cos(p1 - p2) sin t1 sin t2``.
    """
    _check_kind(kind, param)
    if kind == "tmss":
        return math.cos(t1) * math.cos(t2) + math.tanh(2 * param) * math.sin(t1) * math.sin(t2) * math.cos(p1 + p2)
    k = k_of_gamma(abs(param))
    return -math.cos(t1) * math.cos(t2) - k * math.cos(p1 - p2) * math.sin(t1) * math.sin(t2)


def chsh_pseudospin_analytic(kind: str, param: float, s: BellSettings) -> float:
    _require(s, PseudospinSetting)
    return chsh_combination(lambda x, y: pseudospin_correlation(kind, param, x.theta, x.phi, y.theta, y.phi), s)


def pseudospin_max(kind: str, param: float) -> float:
    """Maximal |B|: ``2 sqrt(1 + F^2)`` with ``F = tanh 2r`` (TMSS) or ``K(gamma)`` (ECS)."""
    _check_kind(kind, param)
    f = math.tanh(2 * param) if kind == "tmss" else k_of_gamma(abs(param))
    return 2 * math.sqrt(1 + f * f)


def k_of_gamma(gamma: float) -> float:
    """ECS transverse correlation ``K = S^2 / (cosh g^2 sinh g^2)`` with
    ``S = sum_n g^(4n+1) / sqrt((2n)! (2n+1)!)``.

    Equals the parity-rotation fidelity ``|<d|U(pi/2)|e>|^2`` and lies in (0, 1].
    Evaluated in log space so large ``gamma`` does not overflow.
    """
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError("K(gamma) requires gamma > 0")
    lg = math.log(gamma)
    # terms peak near 4n ~ 2 gamma^2; sum until they are negligible past the peak
    logs = []
    n = 0
    while True:
        t = (4 * n + 1) * lg - 0.5 * (gammaln(2 * n + 1) + gammaln(2 * n + 2))
        logs.append(t)
        if n > gamma**2 and t < max(logs) + math.log(1e-17):
            break
        n += 1
    logs = np.array(logs)
    m = logs.max()
    log_s = m + math.log(np.sum(np.exp(logs - m)))
    g2 = gamma**2
    # log(cosh x sinh x) = log(sinh 2x / 2)
    x = 2 * g2
    log_cs = x + math.log(-math.expm1(-2 * x)) - 2 * math.log(2)
    return min(math.exp(2 * log_s - log_cs), 1.0)


# ---------------------------------------------------------------------------
# CHSH: displaced parity (BW and generalized BW)


def _wigner(kind: str, param: float) -> Callable:
    _check_kind(kind, param)
    if kind == "tmss":
        return lambda a, b: ps.wigner_tmss(a, b, param)
    return lambda a, b: ps.wigner_ecs(a, b, param)


def chsh_gbw(kind: str, param: float, s: BellSettings) -> float:
    """``(pi^2/4)[W(a,b) + W(a,b') + W(a',b) - W(a',b')]`` from closed-form Wigner functions.

    The original BW test is the special case ``a = b = 0``.
    """
    _require(s, DisplacementSetting)
    w = _wigner(kind, param)
    return float(math.pi**2 / 4 * chsh_combination(lambda x, y: w(x.alpha, y.alpha), s))


_CHSH_SIGNS = np.array([1.0, 1.0, 1.0, -1.0])


def _pairs(a, a_prime, b, b_prime):
    return np.stack(np.broadcast_arrays(a, a, a_prime, a_prime), -1), np.stack(
        np.broadcast_arrays(b, b_prime, b, b_prime), -1
    )


def chsh_gbw_vec(kind: str, param: float, a, a_prime, b, b_prime):
    """Vectorized :func:`chsh_gbw` over arrays of complex displacements."""
    w = _wigner(kind, param)
    left, right = _pairs(a, a_prime, b, b_prime)
    return math.pi**2 / 4 * (w(left, right) @ _CHSH_SIGNS)


def chsh_bw_numeric(state: TwoModeState, s: BellSettings, method: str = "exact") -> float:
    """Generalized-BW CHSH value from ``<Pi_1(alpha) Pi_2(beta)>`` on the
    truncated state; ``method`` is passed to :func:`~cvbell.observables.bw_parity`."""
    _require(s, DisplacementSetting)
    c = state.cutoff
    ops = {}

    def par(x):
        if x.alpha not in ops:
            ops[x.alpha] = bw_parity(x, c, method)
        return ops[x.alpha]

    return chsh_combination(lambda x, y: expectation(state, par(x), par(y)), s)


# ---------------------------------------------------------------------------
# CHSH: Gisin-Peres


def chsh_gisin_peres(
    state: TwoModeState,
    s: BellSettings,
    N: int | None = None,
    convention: str = "pseudospin",
    table: CorrelationTable | None = None,
) -> float:
    """CHSH with Gisin-Peres observables ``A(theta)`` on ``state`` truncated to
    dimension ``N`` per mode (default: the state's own dimension)."""
    _require(s, ProjectorSetting)
    if table is None:
        if N is not None and N != state.cutoff.dim:
            state = state.truncate(N)
        table = gisin_peres_table(state, convention)
    return chsh_combination(lambda x, y: table(_gp_coeffs(x.theta), _gp_coeffs(y.theta)), s)


# ---------------------------------------------------------------------------
# CH: two-qubit projectors


def ch_qubit(state: TwoModeState, s: BellSettings) -> float:
    """Bell-CH value with ``xi(theta) = |theta><theta|`` on ``span{|0>, |1>}``."""
    _require(s, ProjectorSetting)
    c = state.coeffs
    outside = float(np.sum(np.abs(c) ** 2) - np.sum(np.abs(c[:2, :2]) ** 2))
    if outside > 1e-12:
        warnings.warn(f"state has weight {outside:.3e} outside the two-qubit subspace", stacklevel=2)
    cut = state.cutoff
    ident = FockOperator.identity(cut)
    xi = {}

    def proj(x):
        if x.theta not in xi:
            xi[x.theta] = ch_projector(x, cut)
        return xi[x.theta]

    return ch_combination(
        lambda x, y: expectation(state, proj(x), proj(y)),
        lambda x: expectation(state, proj(x), ident),
        lambda y: expectation(state, ident, proj(y)),
        s,
    )


def ch_qubit_single_photon(s: BellSettings) -> float:
    """Closed form for ``(|0>|1> - |1>|0>)/sqrt 2``::

        (1/4)[cos 2(a'-b') - cos 2(a-b') - cos 2(a'-b) - cos 2(a-b) - 2]
    """
    _require(s, ProjectorSetting)
    a, ap, b, bp = (x.theta for x in s)
    return 0.25 * (math.cos(2 * (ap - bp)) - math.cos(2 * (a - bp)) - math.cos(2 * (ap - b)) - math.cos(2 * (a - b)) - 2)


def _ket(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def ch_operator(s: BellSettings) -> np.ndarray:
    """4x4 Bell-CH operator on two qubits (basis ``|00>, |01>, |10>, |11>``)."""
    _require(s, ProjectorSetting)
    xi = {t: np.outer(_ket(t), _ket(t)) for t in {x.theta for x in s}}
    e = np.eye(2)
    a, ap, b, bp = (xi[x.theta] for x in s)
    return np.kron(a, b) + np.kron(a, bp) + np.kron(ap, b) - np.kron(ap, bp) - np.kron(a, e) - np.kron(e, b)


def ch_delta_operator(s: BellSettings) -> np.ndarray:
    """The operator ``Delta`` with ``B_CH^2 = -B_CH - Delta``."""
    _require(s, ProjectorSetting)
    a, ap, b, bp = (x.theta for x in s)

    def part(t, tp):
        k, kp = _ket(t), _ket(tp)
        return (k @ kp) * (np.outer(k, kp) - np.outer(kp, k))

    return np.kron(part(a, ap), part(b, bp))


def ch_delta_bounds(s: BellSettings) -> tuple[float, float]:
    """Setting-dependent range ``(-1 -+ sqrt(1 - 4 delta)) / 2`` where ``delta``
    is the smallest eigenvalue of ``Delta``."""
    _require(s, ProjectorSetting)
    a, ap, b, bp = (x.theta for x in s)
    delta = -abs(math.sin(2 * (a - ap)) * math.sin(2 * (b - bp))) / 4
    root = math.sqrt(1 - 4 * delta)
    return (-1 - root) / 2, (-1 + root) / 2


# ---------------------------------------------------------------------------
# CH: vacuum projection (Q function)


def _q_functions(kind: str, param: float):
    _check_kind(kind, param, STATE_KINDS)
    if kind == "tmss":
        return (lambda a, b: ps.q_tmss(a, b, param)), (lambda a: ps.q_marginal_tmss(a, param)), (
            lambda b: ps.q_marginal_tmss(b, param)
        )
    if kind == "ecs":
        return (lambda a, b: ps.q_ecs(a, b, param)), (lambda a: ps.q_marginal_ecs(a, param)), (
            lambda b: ps.q_marginal_ecs(b, param)
        )
    return ps.q_single_photon, ps.q_marginal_single_photon, ps.q_marginal_single_photon


def ch_q_formalism(kind: str, param: float, s: BellSettings) -> float:
    """``pi^2 [Q(a,b) + Q(a,b') + Q(a',b) - Q(a',b')] - pi [Q_1(a) + Q_2(b)]``."""
    _require(s, DisplacementSetting)
    q, q1, q2 = _q_functions(kind, param)
    return float(
        ch_combination(
            lambda x, y: math.pi**2 * q(x.alpha, y.alpha),
            lambda x: math.pi * q1(x.alpha),
            lambda y: math.pi * q2(y.alpha),
            s,
        )
    )


def ch_q_vec(kind: str, param: float, a, a_prime, b, b_prime):
    """Vectorized :func:`ch_q_formalism` over arrays of complex displacements."""
    q, q1, q2 = _q_functions(kind, param)
    left, right = _pairs(a, a_prime, b, b_prime)
    return math.pi**2 * (q(left, right) @ _CHSH_SIGNS) - math.pi * (q1(a) + q2(b))


def ch_q_numeric(state: TwoModeState, s: BellSettings, method: str = "exact") -> float:
    """Q-formalism CH value from ``zeta(alpha) = D|0><0|D^dagger`` on the truncated state."""
    _require(s, DisplacementSetting)
    c = state.cutoff
    ident = FockOperator.identity(c)
    ops = {}

    def zeta(x):
        if x.alpha not in ops:
            ops[x.alpha] = bw_ch_projector(x, c, method)
        return ops[x.alpha]

    return ch_combination(
        lambda x, y: expectation(state, zeta(x), zeta(y)),
        lambda x: expectation(state, zeta(x), ident),
        lambda y: expectation(state, ident, zeta(y)),
        s,
    )


# ---------------------------------------------------------------------------
# CH: rotated parity projectors


def chi_joint(kind: str, param: float, t1: float, t2: float) -> float:
    """Closed-form ``<chi_1(t1) (x) chi_2(t2)>``.

    TMSS: ``(c1^2 c2^2 cosh^2 r + s1^2 s2^2 sinh^2 r)/cosh 2r + s1 c1 s2 c2 tanh 2r``.
    ECS:  ``(s1^2 c2^2 + c1^2 s2^2)/2 - K s1 c1 s2 c2``.
    """
    _check_kind(kind, param)
    c1, s1, c2, s2 = math.cos(t1), math.sin(t1), math.cos(t2), math.sin(t2)
    if kind == "tmss":
        r = param
        ch2, sh2, c2r = math.cosh(r) ** 2, math.sinh(r) ** 2, math.cosh(2 * r)
        return (c1 * c1 * c2 * c2 * ch2 + s1 * s1 * s2 * s2 * sh2) / c2r + s1 * c1 * s2 * c2 * math.tanh(2 * r)
    k = k_of_gamma(abs(param))
    return 0.5 * (s1 * s1 * c2 * c2 + c1 * c1 * s2 * s2) - k * s1 * c1 * s2 * c2


def chi_marginal(kind: str, param: float, t: float) -> float:
    """Closed-form ``<chi(t) (x) 1>`` (identical for both modes)."""
    _check_kind(kind, param)
    if kind == "tmss":
        r = param
        return (math.cos(t) ** 2 * math.cosh(r) ** 2 + math.sin(t) ** 2 * math.sinh(r) ** 2) / math.cosh(2 * r)
    return 0.5


def ch_parity_formalism(kind: str, param: float, s: BellSettings) -> float:
    _require(s, ProjectorSetting)
    return ch_combination(
        lambda x, y: chi_joint(kind, param, x.theta, y.theta),
        lambda x: chi_marginal(kind, param, x.theta),
        lambda y: chi_marginal(kind, param, y.theta),
        s,
    )


def ch_parity_numeric(state: TwoModeState, s: BellSettings, table: CorrelationTable | None = None) -> float:
    _require(s, ProjectorSetting)
    table = table or chi_table(state)
    return ch_combination(
        lambda x, y: table(_chi_coeffs(x.theta), _chi_coeffs(y.theta)),
        lambda x: table(_chi_coeffs(x.theta), _UNIT4),
        lambda y: table(_UNIT4, _chi_coeffs(y.theta)),
        s,
    )
