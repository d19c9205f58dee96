r"""Semiclassical sweeps: hbar -> 0 along a ladder, with fitted rates.

Three families of checks, all phrased as sup-deviations of characteristic
values over a fixed panel of test functions:

* Egorov: evolving a coherent family and its classical limit commutes with
  the dynamics; for coherent states the deviation is exactly
  |e^{-(pi^2 hbar/2)||f||^2} - 1| at every time, so the sweep converges at
  rate 1 and t-independently.
* equilibrium: the quantum Gibbs state at inverse temperature beta_hbar
  converges, depending on how beta_hbar scales against hbar, to the dressed
  point mass (beta_hbar/hbar -> oo: ground-state and sub-linear regimes), to
  the classical Gibbs state at beta (beta_hbar = beta hbar, rate 2), or to
  nothing (super-linear: characteristic values vanish, no state survives).
* scattering: dressing transport commutes with the limit; transported and
  untransported deviations agree to arithmetic precision.

Rates are least-squares slopes of log(deviation) against log(hbar), using
only deviations inside [1e-12, 0.1] (below is arithmetic noise, above is
outside the asymptotic regime) and only when at least 4 ladder points
qualify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import VanHoveSystem, evolve_state
from .grid import MomentumGrid, RadialFunction, from_values, sample
from .scattering import transport_state
from .states import CharState, StateLike, dirac, gibbs_classical, gibbs_quantum

__all__ = [
    "DEFAULT_HBAR_LADDER",
    "GroundState",
    "Linear",
    "SubLinear",
    "SuperLinear",
    "SweepReport",
    "default_panel",
    "fit_rate",
    "egorov_sweep",
    "equilibrium_sweep",
    "scattering_sweep",
]

#: hbar = 2^{-3} .. 2^{-14}, decreasing.
DEFAULT_HBAR_LADDER = tuple(2.0**-k for k in range(3, 15))

_FIT_LO = 1e-12
_FIT_HI = 1e-1
_MIN_FIT_POINTS = 4

#: Deviations whose maximum stays below this count as converged outright.
_NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class GroundState:
    """beta_hbar = oo: the dressed ground state at each hbar."""


@dataclass(frozen=True)
class Linear:
    """beta_hbar = beta * hbar: classical Gibbs limit at beta."""

    beta: float


@dataclass(frozen=True)
class SubLinear:
    """beta_hbar = c * hbar^{1-epsilon}, 0 < epsilon <= 1: dressed point mass."""

    coefficient: float = 1.0
    epsilon: float = 0.5


@dataclass(frozen=True)
class SuperLinear:
    """beta_hbar = c * hbar^{1+epsilon}: no limiting state (chars vanish)."""

    coefficient: float = 1.0
    epsilon: float = 0.5


Regime = GroundState | Linear | SubLinear | SuperLinear


@dataclass(frozen=True)
class SweepReport:
    hbar_values: tuple[float, ...]
    deviations: tuple[float, ...]
    fitted_order: float | None
    verdict: str
    transport_mismatch: float | None = None

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"


def default_panel(grid: MomentumGrid) -> list[RadialFunction]:
    """Eight Gaussians e^{-sigma r^2}, sigma in {1/2, 1, 2, 4}, real and
    imaginary copies; a small frame of infrared-regular test functions."""
    panel: list[RadialFunction] = []
    for sigma in (0.5, 1.0, 2.0, 4.0):
        f = sample(grid, lambda r, s=sigma: np.exp(-s * r**2))
        panel.append(f)
        panel.append(1j * f)
    return panel


def fit_rate(hbars: Sequence[float], deviations: Sequence[float]) -> float:
    """Log-log slope of deviation against hbar on the trusted window."""
    h = np.asarray(hbars, dtype=np.float64)
    d = np.asarray(deviations, dtype=np.float64)
    keep = (d >= _FIT_LO) & (d <= _FIT_HI)
    if keep.sum() < _MIN_FIT_POINTS:
        raise ValueError(
            f"only {int(keep.sum())} deviations inside [{_FIT_LO:g}, {_FIT_HI:g}]; "
            f"need {_MIN_FIT_POINTS} for a rate fit"
        )
    return float(np.polyfit(np.log(h[keep]), np.log(d[keep]), 1)[0])


def _check_ladder(hbars: Sequence[float]) -> tuple[float, ...]:
    hs = tuple(float(h) for h in hbars)
    if len(hs) < 2 or any(b >= a for a, b in zip(hs, hs[1:])) or hs[-1] <= 0.0:
        raise ValueError("hbar ladder must be strictly decreasing and positive")
    return hs

def _sup_deviation(a: StateLike, b: StateLike, panel: Sequence[RadialFunction]) -> float:
    return max(abs(a.char(f) - b.char(f)) for f in panel)


def _report(
    hbars: tuple[float, ...],
    devs: list[float],
    transport_mismatch: float | None = None,
) -> SweepReport:
    try:
        order = fit_rate(hbars, devs)
    except ValueError:
        order = None
    top = max(devs)
    converged = top <= _NOISE_FLOOR or devs[-1] <= 1e-2 * top
    return SweepReport(
        hbar_values=hbars,
        deviations=tuple(devs),
        fitted_order=order,
        verdict="converged" if converged else "diverged",
        transport_mismatch=transport_mismatch,
    )


def egorov_sweep(
    sys: VanHoveSystem,
    family: Callable[[float], StateLike],
    classical_state: StateLike,
    t: float,
    panel: Sequence[RadialFunction],
    hbars: Sequence[float] = DEFAULT_HBAR_LADDER,
) -> SweepReport:
    """Evolve family(hbar) and the classical state to time t, compare."""
    hs = _check_ladder(hbars)
    c_t = evolve_state(sys, classical_state, t)
    devs = [_sup_deviation(evolve_state(sys, family(h), t), c_t, panel) for h in hs]
    return _report(hs, devs)


def _beta_hbar(regime: Regime, hbar: float) -> float:
    if isinstance(regime, GroundState):
        return math.inf
    if isinstance(regime, Linear):
        return regime.beta * hbar
    if isinstance(regime, SubLinear):
        if not 0.0 < regime.epsilon <= 1.0:
            raise ValueError("sub-linear regime needs 0 < epsilon <= 1")
        return regime.coefficient * hbar ** (1.0 - regime.epsilon)
    if isinstance(regime, SuperLinear):
        if regime.epsilon <= 0.0:
            raise ValueError("super-linear regime needs epsilon > 0")
        return regime.coefficient * hbar ** (1.0 + regime.epsilon)
    raise TypeError(f"unknown regime {regime!r}")


def equilibrium_sweep(
    sys: VanHoveSystem,
    regime: Regime,
    panel: Sequence[RadialFunction],
    hbars: Sequence[float] = DEFAULT_HBAR_LADDER,
) -> SweepReport:
    """Quantum Gibbs states along beta_hbar(regime) against their limit."""
    if sys.source is None:
        raise ValueError("equilibrium sweeps need a sourced system")
    hs = _check_ladder(hbars)
    devs: list[float] = []
    if isinstance(regime, SuperLinear):
        for h in hs:
            state = gibbs_quantum(sys.source, _beta_hbar(regime, h), h)
            devs.append(max(abs(state.char(f)) for f in panel))
        return _report(hs, devs)
    if isinstance(regime, Linear):
        target: CharState = gibbs_classical(sys.source, regime.beta)
    else:
        target = dirac(from_values(sys.grid, -sys.j_over_omega.values))
    for h in hs:
        state = gibbs_quantum(sys.source, _beta_hbar(regime, h), h)
        devs.append(_sup_deviation(state, target, panel))
    return _report(hs, devs)


def scattering_sweep(
    sys: VanHoveSystem,
    family: Callable[[float], StateLike],
    classical_state: StateLike,
    panel: Sequence[RadialFunction],
    hbars: Sequence[float] = DEFAULT_HBAR_LADDER,
) -> SweepReport:
    """Dressing transport commutes with hbar -> 0: transported and
    untransported sup-deviations agree to 1e-15 pointwise on the ladder."""
    hs = _check_ladder(hbars)
    c_transported = transport_state(sys, classical_state)
    devs: list[float] = []
    worst = 0.0
    for h in hs:
        state = family(h)
        plain = _sup_deviation(state, classical_state, panel)
        moved = _sup_deviation(transport_state(sys, state), c_transported, panel)
        worst = max(worst, abs(moved - plain))
        if abs(moved - plain) > 1e-15:
            raise RuntimeError(
                "transport does not commute with the semiclassical limit: "
                f"deviation gap {abs(moved - plain):.3e} at hbar = {h}"
            )
        devs.append(moved)
    return _report(hs, devs, transport_mismatch=worst)
