"""Ready-made :class:`~cvbell.optimize.OptimizeSpec` instances for every
formalism/state pair.

Displacement settings are optimized in scaled units: the physical
displacement is ``scale * x``, with ``scale = 1/sqrt(cosh 2r)`` for the TMSS
Wigner function (whose features shrink like that) and ``1/max(gamma, 1)``
for the ECS Wigner function (optimum locations move like ``pi/gamma``).
"""
from __future__ import annotations

import math

import numpy as np

from . import bell
from .bell import BellSettings
from .fock import CutoffLike, TwoModeState, make_ecs, make_single_photon_entangled, make_tmss
from .optimize import OptimizeSpec


def make_state(kind: str, param: float, cutoff: CutoffLike = None) -> TwoModeState:
    if kind == "tmss":
        return make_tmss(param, cutoff)
    if kind == "ecs":
        return make_ecs(param, cutoff)
    if kind == "single_photon":
        return make_single_photon_entangled(cutoff if cutoff is not None else 1)
    raise ValueError(f"unknown state kind {kind!r}")


def default_direction(formalism: str, kind: str) -> str:
    if formalism in bell.CHSH_FORMALISMS:
        return "max_abs"
    return "max" if kind == "tmss" else "min"


def displacement_scale(formalism: str, kind: str, param: float) -> float:
    if formalism in ("bw", "gbw"):
        if kind == "tmss":
            return 1.0 / math.sqrt(math.cosh(2 * param))
        return 1.0 / max(abs(param), 1.0)
    return 1.0


def displacement_box(formalism: str, kind: str, param: float) -> float:
    if formalism in ("bw", "gbw"):
        return 1.0 if kind == "tmss" else 2.0
    return 1.0


def wrap_angles(x) -> np.ndarray:
    """Reduce angles to ``(-pi, pi]`` for reporting; every functional is ``2 pi`` periodic."""
    x = np.asarray(x, dtype=float)
    return np.pi - np.mod(np.pi - x, 2 * np.pi)


def decode_displacements(x: np.ndarray, scale: float, restricted: bool, imaginary: bool) -> BellSettings:
    x = np.asarray(x, dtype=float)
    z = 1j * x if imaginary else x[0::2] + 1j * x[1::2]
    z = scale * z
    if restricted:
        a_prime, b_prime = z
        return BellSettings.displacements(0, a_prime, 0, b_prime)
    return BellSettings.displacements(*z)


def bell_problem(
    formalism: str,
    state: str | TwoModeState,
    param: float = 0.0,
    *,
    restricted: bool = False,
    imaginary: bool = False,
    direction: str | None = None,
    restarts: int = 32,
    seed: int = 0,
    cutoff: CutoffLike = None,
    N: int | None = None,
    method: str = "numeric",
    tol: float = 1e-12,
) -> OptimizeSpec:
    """Build the optimization problem for one formalism.

    Parameters
    ----------
    formalism : str
        One of :data:`cvbell.bell.FORMALISMS`.  ``"bw"`` is ``"gbw"`` with the
        first setting of each side pinned to zero; for ``"ch_q"`` the same
        restriction is requested with ``restricted=True``.
    state : str or TwoModeState
        ``"tmss"``, ``"ecs"``, ``"single_photon"`` or, for the matrix-based
        formalisms, an explicit truncated state.
    param : float
        Squeezing ``r`` or ECS amplitude ``gamma``.
    imaginary : bool
        Restrict displacements to the imaginary axis.
    method : {"numeric", "analytic"}
        Pseudospin and parity-CH only: truncated-matrix tables or closed forms.
    """
    if formalism not in bell.FORMALISMS:
        raise ValueError(f"unknown formalism {formalism!r}")
    kind = state if isinstance(state, str) else "custom"
    direction = direction or default_direction(formalism, kind)
    common = dict(direction=direction, restarts=restarts, seed=seed, formalism=formalism, tol=tol)
    meta = {"state": kind, "param": float(param)}

    if formalism in ("bw", "gbw", "ch_q"):
        if kind == "custom":
            raise ValueError(f"{formalism} uses closed-form phase-space functions; pass a state kind")
        if formalism in ("bw", "gbw") and kind == "single_photon":
            raise ValueError("CHSH formalisms are not defined for the single-photon state here")
        restricted = restricted or formalism == "bw"
        scale = displacement_scale(formalism, kind, param)
        box = displacement_box(formalism, kind, param)
        n_disp = 2 if restricted else 4
        dim = n_disp if imaginary else 2 * n_disp

        def decode(x):
            return decode_displacements(x, scale, restricted, imaginary)

        vec = bell.ch_q_vec if formalism == "ch_q" else bell.chsh_gbw_vec

        def value(x):
            # hot path: skip building BellSettings for every evaluation
            z = scale * (1j * x if imaginary else x[0::2] + 1j * x[1::2])
            if restricted:
                return float(vec(kind, param, 0j, z[0], 0j, z[1]))
            return float(vec(kind, param, *z))

        meta.update(scale=scale, restricted=restricted, imaginary=imaginary)
        return OptimizeSpec(value, dim, [[-box, box]] * dim, decode=decode, meta=meta, **common)

    if formalism == "pseudospin":
        if method == "analytic":
            if kind not in ("tmss", "ecs"):
                raise ValueError("analytic pseudospin path needs state kind 'tmss' or 'ecs'")

            def value(x):
                return bell.chsh_pseudospin_analytic(kind, param, BellSettings.spins(*x.reshape(4, 2)))
        else:
            st = make_state(kind, param, cutoff) if isinstance(state, str) else state
            table = bell.pseudospin_table(st)
            meta.update(cutoff=st.cutoff.n_max, tail_mass=st.tail_mass)

            def value(x):
                return bell.chsh_pseudospin(st, BellSettings.spins(*x.reshape(4, 2)), table=table)

        return OptimizeSpec(
            value, 8, [[-math.pi, math.pi]] * 8, decode=lambda x: BellSettings.spins(*wrap_angles(x).reshape(4, 2)),
            meta=meta, **common,
        )

    def angles(x):
        return BellSettings.angles(*x)

    def decode(x):
        return BellSettings.angles(*wrap_angles(x))

    if formalism == "gisin_peres":
        st = make_state(kind, param, cutoff) if isinstance(state, str) else state
        if N is not None and N != st.cutoff.dim:
            st = st.truncate(N)
        table = bell.gisin_peres_table(st)
        meta.update(N=st.cutoff.dim, tail_mass=st.tail_mass)

        def value(x):
            return bell.chsh_gisin_peres(st, angles(x), table=table)

    elif formalism == "ch_qubit":
        st = make_state(kind if kind != "custom" else "single_photon", param, 1) if isinstance(state, str) else state

        def value(x):
            return bell.ch_qubit(st, angles(x))

    else:  # ch_parity
        if method == "analytic":
            if kind not in ("tmss", "ecs"):
                raise ValueError("analytic parity-CH path needs state kind 'tmss' or 'ecs'")

            def value(x):
                return bell.ch_parity_formalism(kind, param, angles(x))
        else:
            st = make_state(kind, param, cutoff) if isinstance(state, str) else state
            table = bell.chi_table(st)
            meta.update(cutoff=st.cutoff.n_max, tail_mass=st.tail_mass)

            def value(x):
                return bell.ch_parity_numeric(st, angles(x), table=table)

    return OptimizeSpec(value, 4, [[-math.pi, math.pi]] * 4, decode=decode, meta=meta, **common)
