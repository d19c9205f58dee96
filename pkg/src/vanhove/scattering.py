r"""Wave operators, dressing transport, and long-time decay probes.

For regular and type I sources the interacting dynamics converges to the
free one after dressing: the Moller maps exist, coincide for t -> +-oo, and
the scattering operator is the identity.  On exponential elements the
asymptotic (dressed) element is

    W^as_h(f) = W_h(f) exp(2 pi i Re <f, J/omega>_0),

and on states the transport is the phase-space shift by J/omega.  The rate
of convergence is controlled by the free-evolution overlap

    ov(t) = <f, e^{i t omega} J/omega>_0,

which decays as t -> oo by stationary phase; the deviation of the evolved
element from its asymptote is |e^{-2 pi i Re ov(t)} - 1| <= 2 pi |ov(t)|.

Plain node sums alias once t exceeds the panel resolution, so for |t| above
a small threshold the overlap integral is evaluated by a Filon-type rule:
per quadrature panel the non-oscillatory amplitude is fitted in the
dispersion variable u = omega(r) by a Legendre series (least squares on the
panel samples), and int P_k(x) e^{i theta x} dx = 2 i^k j_k(theta) supplies
the oscillatory moments exactly (spherical Bessel j_k).  The fit is t-free,
so probing many times costs one fit plus trivial per-t sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import spherical_jn

from .grid import MomentumGrid, RadialFunction, inner_product
from .states import MappedState, StateLike
from .weyl import TrigPolynomial, WeylTerm, handle, trig_polynomial

__all__ = [
    "FILON_THRESHOLD",
    "asymptotic_character",
    "dressing_coefficient",
    "free_overlap",
    "decay_probe",
    "ConvergenceReport",
    "convergence_probe",
    "transport_state",
]

#: Above this |t| the overlap switches from the plain node sum to Filon.
FILON_THRESHOLD = 32.0

_FILON_DEGREE = 16


def dressing_coefficient(sys, f: RadialFunction) -> complex:
    """exp(2 pi i Re <f, J/omega>_0), the asymptotic dressing phase."""
    angle = 2.0 * math.pi * inner_product(f, sys.j_over_omega, 0).real
    return complex(math.cos(angle), math.sin(angle))


def asymptotic_character(sys, f: RadialFunction, hbar: float) -> TrigPolynomial:
    """The dressed element W_h(f) e^{2 pi i Re <f, J/omega>} (same for +-oo)."""
    if f.grid is not sys.grid:
        raise ValueError("argument lives on a different grid than the system")
    return trig_polynomial(
        sys.grid, hbar, [WeylTerm(dressing_coefficient(sys, f), handle(f))]
    )


# --------------------------------------------------------------------------
# resolved overlap <f, e^{i t omega} J/omega>


@dataclass(frozen=True, eq=False)
class _FilonFit:
    """t-independent Legendre fit of the overlap amplitude per panel."""

    coeffs: np.ndarray  # (panels, degree + 1), complex
    u_mid: np.ndarray  # (panels,)
    u_half: np.ndarray  # (panels,)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        theta = np.multiply.outer(t, self.u_half)  # (T, panels)
        theta0 = np.multiply.outer(t, self.u_mid)
        acc = np.zeros_like(theta, dtype=np.complex128)
        for k in range(self.coeffs.shape[1]):
            acc += (2.0 * 1j**k) * spherical_jn(k, theta) * self.coeffs[None, :, k]
        return np.sum(acc * np.exp(1j * theta0) * self.u_half[None, :], axis=1)


def _filon_fit(grid: MomentumGrid, amplitude: np.ndarray) -> _FilonFit:
    """Fit sigma r^{d-1} amp(r) dr = A(u) du per panel, A in Legendre form."""
    n_panels = grid.panel_edges.size - 1
    pts = grid.points_per_panel
    if pts <= _FILON_DEGREE:
        raise ValueError(
            f"oscillatory quadrature needs more than {_FILON_DEGREE} points "
            f"per panel, grid has {pts}"
        )
    r = grid.nodes.reshape(n_panels, pts)
    u = grid.omega.reshape(n_panels, pts)
    u_edges = np.hypot(grid.panel_edges, grid.mass)
    u_lo, u_hi = u_edges[:-1], u_edges[1:]
    u_mid = 0.5 * (u_hi + u_lo)
    u_half = 0.5 * (u_hi - u_lo)
    # du = (r/u) dr, so the u-space amplitude is amp * u / r.
    amp_u = amplitude.reshape(n_panels, pts) * (u / r)
    coeffs = np.empty((n_panels, _FILON_DEGREE + 1), dtype=np.complex128)
    for p in range(n_panels):
        x = (u[p] - u_mid[p]) / u_half[p]
        design = np.polynomial.legendre.legvander(x, _FILON_DEGREE)
        coeffs[p], *_ = np.linalg.lstsq(design, amp_u[p], rcond=None)
    return _FilonFit(coeffs=coeffs, u_mid=u_mid, u_half=u_half)


def _overlap_amplitude(sys, f: RadialFunction) -> np.ndarray:
    grid = sys.grid
    return (
        grid.angular_factor
        * grid.nodes ** (grid.dim - 1)
        * np.conj(f.values)
        * sys.j_over_omega.values
    )


def free_overlap(sys, f: RadialFunction, t) -> np.ndarray | complex:
    """<f, e^{i t omega} J/omega>_0, resolved at any t.

    Plain quadrature below FILON_THRESHOLD, Filon beyond; at the crossover
    both evaluate the same panel integrals to high accuracy.
    """
    if f.grid is not sys.grid:
        raise ValueError("argument lives on a different grid than the system")
    scalar = np.isscalar(t)
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.empty(tt.shape, dtype=np.complex128)
    grid = sys.grid
    small = np.abs(tt) <= FILON_THRESHOLD
    if small.any():
        v = grid.measure(0) * np.conj(f.values) * sys.j_over_omega.values
        out[small] = np.exp(1j * np.multiply.outer(tt[small], grid.omega)) @ v
    if (~small).any():
        fit = _filon_fit(grid, _overlap_amplitude(sys, f))
        out[~small] = fit(tt[~small])
    return complex(out[0]) if scalar else out


def decay_probe(sys, f: RadialFunction, t_grid) -> np.ndarray:
    """|<f, e^{i t omega} J/omega>_0| on a ladder of times."""
    return np.abs(free_overlap(sys, f, t_grid))


@dataclass(frozen=True)
class ConvergenceReport:
    t: float
    coefficient: complex
    target: complex
    deviation: float
    bound: float


def convergence_probe(sys, f: RadialFunction, hbar: float, t: float) -> ConvergenceReport:
    """Coefficient of tau_t[W_h(e^{-i t omega} f)] against its asymptote.

    The exact coefficient is exp(2 pi i (Re <f, J/omega> - Re ov(t))); its
    distance from the dressing coefficient is bounded by 2 pi |ov(t)|.
    """
    if hbar < 0.0:
        raise ValueError(f"hbar must be >= 0, got {hbar}")
    target = dressing_coefficient(sys, f)
    ov = free_overlap(sys, f, float(t))
    base_angle = 2.0 * math.pi * inner_product(f, sys.j_over_omega, 0).real
    angle = base_angle - 2.0 * math.pi * ov.real
    coeff = complex(math.cos(angle), math.sin(angle))
    return ConvergenceReport(
        t=float(t),
        coefficient=coeff,
        target=target,
        deviation=abs(coeff - target),
        bound=2.0 * math.pi * abs(ov),
    )


def transport_state(sys, state: StateLike, inverse: bool = False) -> MappedState:
    """Shift a state by the dressing profile: char -> char * e^{+-2 pi i Re <f, J/omega>}.

    The forward map is the common value of both Moller transports (they
    coincide), so transport followed by inverse transport is the identity
    and the scattering map on states is trivial.
    """
    if state.grid is not sys.grid:
        raise ValueError("state lives on a different grid than the system")
    sign = -1.0 if inverse else 1.0

    def char_fn(f: RadialFunction) -> complex:
        angle = sign * 2.0 * math.pi * inner_product(f, sys.j_over_omega, 0).real
        return state.char(f) * complex(math.cos(angle), math.sin(angle))

    return MappedState(hbar=state.hbar, grid=sys.grid, char_fn=char_fn)
