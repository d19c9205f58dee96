r"""Quasi-free states given by closed-form characteristic functions.

A state is the positive-definite function f -> omega(W_h(f)) it induces on
the exponential algebra.  The catalogue (T is a grid function, J a source,
omega the dispersion, beta an inverse temperature):

    coherent(T, h):   exp(-(pi^2 h / 2) ||f||_0^2) exp(2 pi i Re <f, T>_0)
    dirac(T):         exp(2 pi i Re <f, T>_0)                      (h = 0)
    gibbs_quantum:    exp(-(pi^2 h / 2) <f, coth(beta_h omega / 2) f>_0)
                      * exp(2 pi i Re <f, -J/omega>_0)             (h > 0)
    gibbs_classical:  exp(-(pi^2 / beta) <f, f>_{-1})
                      * exp(2 pi i Re <f, -J/omega>_0)             (h = 0)
    deformed(base,h): exp(-(pi^2 h / 2) ||f||_0^2) * base(f)

The quantum Gibbs state at beta_h = oo degenerates to the coherent state
centred at -J/omega (the dressed ground state); deforming a Dirac state
reproduces the coherent state bit for bit.  Gibbs states exist only for
sources whose infrared class keeps -J/omega square-integrable (regular or
type I); type II sources have no dressed state and are rejected.

Positive-definiteness is observable: for any finite panel {f_j} the matrix

    M_{jk} = omega(W_h(f_j - f_k)) exp(-i pi^2 h sigma(f_j, f_k))

is Hermitian positive semidefinite (Bochner).  ``bochner_gram`` builds it
and reports the minimal eigenvalue against the tolerance 1e-10 * size.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Protocol, Sequence

import numpy as np

from .grid import (
    MomentumGrid,
    RadialFunction,
    from_values,
    inner_product,
    weighted_norm_sq,
)
from .sources import InfraredClass, SourceSpec, classify, realize
from .weyl import TrigPolynomial, symplectic_form

__all__ = [
    "StateKind",
    "CharState",
    "MappedState",
    "StateLike",
    "coherent",
    "dirac",
    "gibbs_quantum",
    "gibbs_classical",
    "deformed",
    "evaluate",
    "gram_matrix",
    "bochner_gram",
    "GramReport",
    "PSD_TOL_PER_SIZE",
    "stable_coth",
    "gibbs_regularization_deviations",
]

_PI2 = math.pi**2

#: Gram PSD tolerance is this times the panel size.
PSD_TOL_PER_SIZE = 1e-10

#: Hermitian-defect guard for Gram matrices.
_HERMITIAN_TOL = 1e-10

_MAX_PANEL = 64


class StateKind(enum.Enum):
    COHERENT = "coherent"
    DIRAC = "dirac"
    GIBBS_QUANTUM = "gibbs_quantum"
    GIBBS_CLASSICAL = "gibbs_classical"
    DEFORMED = "deformed"


class StateLike(Protocol):
    """Anything that evaluates characteristic values at a fixed hbar."""

    hbar: float
    grid: MomentumGrid

    def char(self, f: RadialFunction) -> complex: ...


@dataclass(frozen=True, eq=False)
class CharState:
    kind: StateKind
    hbar: float
    grid: MomentumGrid
    center: RadialFunction | None = None
    beta: float | None = None
    base: "CharState | None" = None
    thermal_weight: np.ndarray | None = None

    def char(self, f: RadialFunction) -> complex:
        if f.grid is not self.grid:
            raise ValueError("argument lives on a different grid than the state")
        kind = self.kind
        if kind is StateKind.COHERENT:
            return _vacuum_gauss(self.hbar, f) * _center_phase(f, self.center)
        if kind is StateKind.DIRAC:
            return _center_phase(f, self.center)
        if kind is StateKind.GIBBS_QUANTUM:
            v = f.values
            q = float(np.sum(self.thermal_weight * (v.real**2 + v.imag**2)))
            return math.exp(-0.5 * _PI2 * self.hbar * q) * _center_phase(f, self.center)
        if kind is StateKind.GIBBS_CLASSICAL:
            damp = math.exp(-(_PI2 / self.beta) * weighted_norm_sq(f, -1))
            return damp * _center_phase(f, self.center)
        if kind is StateKind.DEFORMED:
            return _vacuum_gauss(self.hbar, f) * self.base.char(f)
        raise AssertionError(f"unhandled state kind {kind}")


@dataclass(frozen=True, eq=False)
class MappedState:
    """A state transformed by a character-level map (evolution, transport)."""

    hbar: float
    grid: MomentumGrid
    char_fn: Callable[[RadialFunction], complex]

    def char(self, f: RadialFunction) -> complex:
        if f.grid is not self.grid:
            raise ValueError("argument lives on a different grid than the state")
        return self.char_fn(f)


def _vacuum_gauss(hbar: float, f: RadialFunction) -> float:
    return math.exp(-0.5 * _PI2 * hbar * weighted_norm_sq(f, 0))


def _center_phase(f: RadialFunction, center: RadialFunction | None) -> complex:
    if center is None:
        return 1.0 + 0.0j
    angle = 2.0 * math.pi * inner_product(f, center, 0).real
    return complex(math.cos(angle), math.sin(angle))


def coherent(center: RadialFunction, hbar: float) -> CharState:
    if hbar < 0.0:
        raise ValueError(f"hbar must be >= 0, got {hbar}")
    return CharState(StateKind.COHERENT, float(hbar), center.grid, center=center)


def dirac(center: RadialFunction) -> CharState:
    """Point mass on phase space; the hbar = 0 limit of coherent states."""
    return CharState(StateKind.DIRAC, 0.0, center.grid, center=center)


def _dressed_center(source: SourceSpec) -> RadialFunction:
    cls = classify(source)
    if cls not in (InfraredClass.REGULAR, InfraredClass.TYPE_I):
        raise ValueError(
            f"source classifies as {cls.value}: the dressing energy "
            "||J||_{-1}^2 diverges, so no dressed state exists"
        )
    j = realize(source)
    return from_values(source.grid, -j.values / source.grid.omega)


def gibbs_quantum(source: SourceSpec, beta_h: float, hbar: float) -> CharState:
    """Dressed thermal state; beta_h = oo gives the dressed ground state."""
    if hbar <= 0.0:
        raise ValueError(f"quantum Gibbs states need hbar > 0, got {hbar}")
    if not beta_h > 0.0:
        raise ValueError(f"beta_h must be > 0, got {beta_h}")
    center = _dressed_center(source)
    if math.isinf(beta_h):
        return CharState(StateKind.COHERENT, float(hbar), source.grid, center=center)
    grid = source.grid
    tw = grid.measure(0) * stable_coth(0.5 * beta_h * grid.omega)
    tw.setflags(write=False)
    return CharState(
        StateKind.GIBBS_QUANTUM,
        float(hbar),
        grid,
        center=center,
        beta=float(beta_h),
        thermal_weight=tw,
    )


def gibbs_classical(source: SourceSpec, beta: float) -> CharState:
    if not (beta > 0.0 and math.isfinite(beta)):
        raise ValueError(f"beta must be finite and > 0, got {beta}")
    center = _dressed_center(source)
    return CharState(
        StateKind.GIBBS_CLASSICAL, 0.0, source.grid, center=center, beta=float(beta)
    )


def deformed(base: CharState, hbar: float) -> CharState:
    """Convolve a classical state with the vacuum Gaussian of width hbar."""
    if base.hbar != 0.0:
        raise ValueError("deformation starts from a classical (hbar = 0) state")
    if hbar <= 0.0:
        raise ValueError(f"hbar must be > 0, got {hbar}")
    return CharState(StateKind.DEFORMED, float(hbar), base.grid, base=base)


def stable_coth(x: np.ndarray) -> np.ndarray:
    """coth on (0, oo), stable at both ends (series below 1e-8, 1 above 40)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    small = x < 1e-8
    big = x > 40.0
    mid = ~(small | big)
    out[small] = 1.0 / x[small] + x[small] / 3.0
    out[big] = 1.0
    out[mid] = 1.0 / np.tanh(x[mid])
    return out


def evaluate(state: StateLike, a: TrigPolynomial) -> complex:
    """omega(A) = sum_j c_j omega(W_h(f_j)); hbar and grid must match."""
    if state.hbar != a.hbar:
        raise ValueError(f"hbar mismatch: state {state.hbar} vs polynomial {a.hbar}")
    if state.grid is not a.grid:
        raise ValueError("state and polynomial live on different grids")
    return complex(
        sum(t.coefficient * state.char(t.generator.function) for t in a.terms)
    )


def gram_matrix(state: StateLike, panel: Sequence[RadialFunction]) -> np.ndarray:
    """Bochner matrix M_{jk} = char(f_j - f_k) e^{-i pi^2 h sigma(f_j, f_k)}."""
    n = len(panel)
    if n == 0 or n > _MAX_PANEL:
        raise ValueError(f"panel size must be in 1..{_MAX_PANEL}, got {n}")
    m = np.empty((n, n), dtype=np.complex128)
    for j, fj in enumerate(panel):
        for k, fk in enumerate(panel):
            value = state.char(fj - fk)
            if state.hbar > 0.0:
                s = symplectic_form(fj, fk)
                value *= np.exp(-1j * _PI2 * state.hbar * s)
            m[j, k] = value
    return m


@dataclass(frozen=True)
class GramReport:
    size: int
    min_eigenvalue: float
    hermitian_defect: float
    psd_tol: float

    @property
    def is_psd(self) -> bool:
        return self.min_eigenvalue >= -self.psd_tol


def bochner_gram(state: StateLike, panel: Sequence[RadialFunction]) -> GramReport:
    """Build the Bochner matrix and check positive semidefiniteness."""
    m = gram_matrix(state, panel)
    defect = float(np.max(np.abs(m - m.conj().T)))
    if defect > _HERMITIAN_TOL:
        raise RuntimeError(
            f"Bochner matrix is not Hermitian (defect {defect:.3e}); "
            "state evaluation is inconsistent"
        )
    eigs = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return GramReport(
        size=len(panel),
        min_eigenvalue=float(eigs[0]),
        hermitian_defect=defect,
        psd_tol=PSD_TOL_PER_SIZE * len(panel),
    )


def gibbs_regularization_deviations(
    source: SourceSpec,
    beta_h: float,
    hbar: float,
    f: RadialFunction,
    cutoffs: Sequence[int],
) -> list[float]:
    """Relative deviation of the cutoff-dressed Gibbs characteristic
    function from the full one per cutoff n (the thermal Gaussian factor is
    cutoff-independent, so this isolates the center phase).  For sources
    with a dressed state it decays once 1/n is below the infrared scale of
    f."""
    full = gibbs_quantum(source, beta_h, hbar)
    target = full.char(f)
    scale = max(abs(target), np.finfo(np.float64).tiny)
    out = []
    for n in cutoffs:
        regulated = gibbs_quantum(replace(source, ir_cutoff=int(n)), beta_h, hbar)
        out.append(abs(regulated.char(f) - target) / scale)
    return out
