r"""Dense single-mode Fock machinery: spectra, coherent dressing, bounds.

One radial quadrature node (omega_m, weight) of a sourced system defines a
displaced harmonic mode: with ladder matrices a, a* on the (N+1)-dimensional
truncated Fock space, the mode Hamiltonian is

    H = hbar omega n + sqrt(hbar) (j a* + conj(j) a),

whose exact ground state is the coherent vector W_h(z*) e_0 with amplitude
z* = -j / (pi i hbar omega), energy E_0 = -|j|^2/omega and gap hbar omega.
The field and exponential operators use

    phi_h(z) = sqrt(hbar) (z a* + conj(z) a),    W_h(z) = e^{i pi phi_h(z)},

built by exact Hermitian eigendecomposition, so that <e_0, W_h(z) e_0> =
e^{-(pi^2 hbar/2)|z|^2} and W_h(z) W_h(w) = W_h(z+w) e^{-i pi^2 hbar Im(conj(z) w)}
hold on the trusted (lower) half of the truncated space.  Truncation is
honest: every mode must satisfy N >= 4|j|^2/(hbar omega^2) + 20 so the
displaced ground state lives far from the cutoff edge.

Summing modes over a grid recovers the field quantities analytically: the
total ground energy is -sum |j_m|^2/omega_m = -||J||_{-1}^2 exactly (the
mode couplings absorb the quadrature measure), the total photon number is
||J/omega||_0^2 = ||J||_{-2}^2, and its divergence for type I sources is
the soft-photon catastrophe probed by ``soft_photon_sweep``.

``ladder_bound_check`` verifies the relative bounds

    ||a_h(g) Psi||  <= ||S^{-1/2} g|| ||dGamma_h(S)^{1/2} Psi||,
    ||a*_h(g) Psi|| <= ||S^{-1/2} g|| ||dGamma_h(S)^{1/2} Psi|| + sqrt(hbar) ||g|| ||Psi||

(the second term carries sqrt(hbar): the exact identity ||a* Psi||^2 =
||a Psi||^2 + hbar ||g||^2 ||Psi||^2 forces it, as the vacuum shows).

``garding_probe`` quantizes a nonnegative classical symbol over a single
mode and tracks the lowest eigenvalue of the compressed matrix: plain
quantization dips below zero only O(hbar), anti-Wick stays nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .dynamics import VanHoveSystem
from .grid import MomentumGrid, make_grid
from .sources import SourceSpec, realize
from .weyl import TrigPolynomial, antiwick

__all__ = [
    "FockMode",
    "adequate_cutoff",
    "build_ladder",
    "build_hamiltonian",
    "weyl_matrix",
    "GroundReport",
    "ground_state_analysis",
    "mode_number_expectation",
    "mode_for_node",
    "MultimodeReport",
    "multimode_ground_scan",
    "SoftPhotonReport",
    "soft_photon_sweep",
    "LadderBoundReport",
    "ladder_bound_check",
    "single_mode_grid",
    "GardingReport",
    "garding_probe",
]

_PI = math.pi
_PI2 = math.pi**2

#: Extra Fock levels beyond the displaced occupancy scale.
_CUTOFF_MARGIN = 20

#: Trusted-block unitarity defect ceiling for exponential matrices.
_UNITARITY_TOL = 1e-9


@dataclass(frozen=True)
class FockMode:
    """One displaced harmonic mode on a truncated Fock space."""

    omega: float
    coupling: complex
    cutoff: int
    hbar: float

    def __post_init__(self) -> None:
        if self.omega <= 0.0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.hbar <= 0.0:
            raise ValueError(f"hbar must be > 0, got {self.hbar}")
        if not isinstance(self.cutoff, int) or self.cutoff < 2:
            raise ValueError(f"cutoff must be an integer >= 2, got {self.cutoff!r}")
        needed = adequate_cutoff(self.omega, self.coupling, self.hbar)
        if self.cutoff < needed:
            raise ValueError(
                f"cutoff {self.cutoff} too small for the displacement: "
                f"need >= {needed} (4|j|^2/(hbar omega^2) + {_CUTOFF_MARGIN})"
            )

    @property
    def dim(self) -> int:
        return self.cutoff + 1


def adequate_cutoff(omega: float, coupling: complex, hbar: float) -> int:
    """Smallest admissible truncation for a displaced mode."""
    return math.ceil(4.0 * abs(coupling) ** 2 / (hbar * omega**2)) + _CUTOFF_MARGIN


def build_ladder(mode: FockMode) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(a, a*, n) as dense matrices; [a, a*] = 1 except the (N, N) corner."""
    n = mode.dim
    a = np.zeros((n, n), dtype=np.complex128)
    idx = np.arange(1, n)
    a[idx - 1, idx] = np.sqrt(idx)
    return a, a.conj().T, np.diag(np.arange(n, dtype=np.float64)).astype(np.complex128)


def build_hamiltonian(mode: FockMode) -> np.ndarray:
    """H = hbar omega n + sqrt(hbar) (j a* + conj(j) a); Hermitian by
    construction."""
    a, adag, num = build_ladder(mode)
    j = complex(mode.coupling)
    h = mode.hbar * mode.omega * num + math.sqrt(mode.hbar) * (j * adag + np.conj(j) * a)
    return h


def weyl_matrix(mode: FockMode, z: complex) -> np.ndarray:
    """W_h(z) = exp(i pi phi_h(z)) via exact eigendecomposition.

    Rejects displacements too large for the truncation
    (pi^2 hbar |z|^2 > N/4) and checks unitarity on the trusted lower half.
    """
    z = complex(z)
    if _PI2 * mode.hbar * abs(z) ** 2 > mode.cutoff / 4.0:
        raise ValueError(
            f"displacement |z|^2 = {abs(z)**2:.3g} exceeds the truncation "
            f"adequacy pi^2 hbar |z|^2 <= N/4 for N = {mode.cutoff}"
        )
    a, adag, _ = build_ladder(mode)
    phi = math.sqrt(mode.hbar) * (z * adag + np.conj(z) * a)
    evals, vecs = np.linalg.eigh(_PI * phi)
    w = (vecs * np.exp(1j * evals)) @ vecs.conj().T
    half = mode.cutoff // 2 + 1
    defect = w.conj().T @ w - np.eye(mode.dim)
    worst = float(np.max(np.abs(defect[:half, :half])))
    if worst > _UNITARITY_TOL:
        raise RuntimeError(
            f"exponential matrix lost unitarity on the trusted block "
            f"(defect {worst:.3e}); truncation inadequate"
        )
    return w


@dataclass(frozen=True)
class GroundReport:
    energy: float
    energy_closed_form: float
    gap: float
    overlap_sq: float


def ground_state_analysis(mode: FockMode) -> GroundReport:
    """Diagonalize H and compare against the displaced-oscillator closed
    forms: E_0 = -|j|^2/omega, gap = hbar omega, ground vector = coherent
    vector W_h(z*) e_0 with z* = i j/(pi hbar omega)."""
    evals, vecs = np.linalg.eigh(build_hamiltonian(mode))
    z_star = 1j * complex(mode.coupling) / (_PI * mode.hbar * mode.omega)
    e0 = np.zeros(mode.dim, dtype=np.complex128)
    e0[0] = 1.0
    coherent_vec = weyl_matrix(mode, z_star) @ e0
    overlap = np.vdot(coherent_vec, vecs[:, 0])
    return GroundReport(
        energy=float(evals[0]),
        energy_closed_form=-abs(mode.coupling) ** 2 / mode.omega,
        gap=float(evals[1] - evals[0]),
        overlap_sq=float(abs(overlap) ** 2),
    )


def mode_number_expectation(mode: FockMode) -> float:
    """<dGamma_h(1)> = hbar <n> in the true (diagonalized) ground state;
    closed form |j/omega|^2."""
    evals, vecs = np.linalg.eigh(build_hamiltonian(mode))
    ground = vecs[:, 0]
    occ = np.arange(mode.dim, dtype=np.float64)
    return float(mode.hbar * np.sum(occ * np.abs(ground) ** 2))


# --------------------------------------------------------------------------
# assembling grid modes


def mode_for_node(sys: VanHoveSystem, index: int, hbar: float) -> FockMode:
    """The displaced mode at grid node ``index``: the coupling absorbs the
    square root of the quadrature measure, so mode sums reproduce grid
    norms exactly."""
    grid = sys.grid
    omega = float(grid.omega[index])
    j = complex(sys.j.values[index]) * math.sqrt(grid.measure(0)[index])
    return FockMode(
        omega=omega,
        coupling=j,
        cutoff=adequate_cutoff(omega, j, hbar),
        hbar=float(hbar),
    )


@dataclass(frozen=True)
class MultimodeReport:
    energy_matrix_sum: float
    energy_closed_form: float
    overlap_sq_product: float
    modes: int


def multimode_ground_scan(sys: VanHoveSystem, hbar: float) -> MultimodeReport:
    """Diagonalize every node mode and sum: total E_0 against -||J||_{-1}^2,
    and the product of squared ground overlaps (fidelity of the coherent
    ansatz across all modes)."""
    grid = sys.grid
    total = 0.0
    fidelity = 1.0
    for i in range(grid.size):
        report = ground_state_analysis(mode_for_node(sys, i, hbar))
        total += report.energy
        fidelity *= report.overlap_sq
    return MultimodeReport(
        energy_matrix_sum=total,
        energy_closed_form=-float(
            np.sum(grid.measure(-1) * np.abs(sys.j.values) ** 2)
        ),
        overlap_sq_product=fidelity,
        modes=grid.size,
    )


@dataclass(frozen=True)
class SoftPhotonReport:
    cutoffs: tuple[int, ...]
    numbers: tuple[float, ...]
    increment_slope: float | None
    diverging: bool


def soft_photon_sweep(
    sys: VanHoveSystem, hbar: float, cutoffs: Sequence[int]
) -> SoftPhotonReport:
    """Total photon number ||J_n||_{-2}^2 of the dressed ground state per
    infrared cutoff n (grid norms of the masked source; hbar drops out of
    the closed form).  The slope is fitted on log increments between
    consecutive cutoffs, skipping the first increment (ultraviolet bias);
    a nonnegative slope within 0.1 flags soft-photon divergence."""
    if sys.source is None:
        raise ValueError("soft-photon sweeps need a sourced system")
    ns = tuple(int(n) for n in cutoffs)
    if len(ns) < 3 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("cutoffs must be strictly increasing, at least 3 of them")
    grid = sys.grid
    numbers = []
    for n in ns:
        j_n = realize(replace(sys.source, ir_cutoff=n)).values
        numbers.append(float(np.sum(grid.measure(-2) * np.abs(j_n) ** 2)))
    increments = np.diff(numbers)
    mids = np.sqrt(np.asarray(ns[:-1], dtype=float) * np.asarray(ns[1:], dtype=float))
    keep = increments > 0.0
    keep[0] = False
    slope: float | None
    if keep.sum() >= 3:
        slope = float(np.polyfit(np.log(mids[keep]), np.log(increments[keep]), 1)[0])
    else:
        slope = None
    diverging = slope is not None and slope >= -0.1
    return SoftPhotonReport(
        cutoffs=ns,
        numbers=tuple(numbers),
        increment_slope=slope,
        diverging=diverging,
    )


# --------------------------------------------------------------------------
# relative bounds for the scaled ladder operators


@dataclass(frozen=True)
class LadderBoundReport:
    trials: int
    max_annihilation_ratio: float
    max_creation_ratio: float


def ladder_bound_check(
    mode: FockMode, s_diag: float, trials: int = 200, seed: int = 0
) -> LadderBoundReport:
    """Ratios LHS/RHS of the relative bounds over random truncated vectors.

    Vectors have their top two components zeroed so that creation does not
    leak past the cutoff; for a single mode the annihilation bound is an
    identity (ratio 1) and the creation bound is strict except at edge
    cases, so all ratios must be <= 1 up to arithmetic (1 + 1e-12).
    """
    if s_diag <= 0.0:
        raise ValueError(f"s_diag must be > 0, got {s_diag}")
    if trials < 1:
        raise ValueError("need at least one trial")
    a, adag, _ = build_ladder(mode)
    occ = np.arange(mode.dim, dtype=np.float64)
    sqrt_h = math.sqrt(mode.hbar)
    # test function g = 1: ||S^{-1/2} g|| = s^{-1/2}, ||g|| = 1.
    s_inv_half = 1.0 / math.sqrt(s_diag)
    rng = np.random.default_rng(seed)
    worst_a = 0.0
    worst_c = 0.0
    for _ in range(trials):
        psi = rng.standard_normal(mode.dim) + 1j * rng.standard_normal(mode.dim)
        psi[-2:] = 0.0
        psi /= np.linalg.norm(psi)
        dgamma_half = math.sqrt(mode.hbar * s_diag) * np.sqrt(occ) * psi
        bound_core = s_inv_half * np.linalg.norm(dgamma_half)
        lhs_a = sqrt_h * np.linalg.norm(a @ psi)
        lhs_c = sqrt_h * np.linalg.norm(adag @ psi)
        if bound_core > 0.0:
            worst_a = max(worst_a, lhs_a / bound_core)
        worst_c = max(worst_c, lhs_c / (bound_core + sqrt_h * np.linalg.norm(psi)))
    return LadderBoundReport(
        trials=trials,
        max_annihilation_ratio=worst_a,
        max_creation_ratio=worst_c,
    )


# --------------------------------------------------------------------------
# sharp Garding probe over a single abstract mode


def single_mode_grid() -> MomentumGrid:
    """A one-node grid whose plain measure is exactly 1, so grid functions
    are single complex amplitudes and the exponential-algebra machinery
    (symplectic form Im conj(z) w, norms |z|^2) applies verbatim."""
    return make_grid(dim=1, mass=0.0, r_min=0.75, r_max=1.25, panels=1, points=1)


@dataclass(frozen=True)
class GardingReport:
    hbar_values: tuple[float, ...]
    lambda_min: tuple[float, ...]
    lambda_min_antiwick: tuple[float, ...]
    cutoffs: tuple[int, ...]
    fitted_constant: float
    fit_residual: float
    symbol_min: float

    @property
    def bound_margin(self) -> float:
        """min over hbar of lambda_min + C hbar: >= 0 (up to arithmetic)
        certifies the -C hbar lower bound at the fitted rate constant."""
        return min(
            lam + self.fitted_constant * h
            for lam, h in zip(self.lambda_min, self.hbar_values)
        )


def _refine_torus_min(
    coeffs: np.ndarray, lattice: np.ndarray, x0: float, y0: float
) -> float:
    """Polish a sampled torus minimum of Re sum c e^{2 pi i (a x + b y)} by
    Newton steps (analytic gradient/Hessian); falls back to the sampled
    value whenever a step stops being a descent."""
    a, b = lattice.real, lattice.imag
    xy = np.array([x0, y0], dtype=np.float64)

    def value(pt: np.ndarray) -> float:
        return float(np.sum(coeffs * np.exp(2j * _PI * (a * pt[0] + b * pt[1]))).real)

    best = value(xy)
    for _ in range(60):
        ph = coeffs * np.exp(2j * _PI * (a * xy[0] + b * xy[1]))
        grad = 2.0 * _PI * np.array(
            [float(np.sum(1j * a * ph).real), float(np.sum(1j * b * ph).real)]
        )
        quad = -((2.0 * _PI) ** 2)
        hess = np.array(
            [
                [quad * float(np.sum(a * a * ph).real), quad * float(np.sum(a * b * ph).real)],
                [quad * float(np.sum(a * b * ph).real), quad * float(np.sum(b * b * ph).real)],
            ]
        )
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        candidate = xy - step
        cand_val = value(candidate)
        if cand_val > best + 1e-15:
            break
        xy, moved = candidate, float(np.max(np.abs(step)))
        best = min(best, cand_val)
        if moved < 1e-13:
            break
    return best


def _garding_cutoff(hbar: float, floor: int) -> int:
    """Truncation large enough that states localized anywhere inside the
    unit periodicity cell (occupation <= 1/(2 hbar)) sit well inside the
    trusted lower half of the basis."""
    n_loc = 0.5 / hbar
    return max(floor, 2 * math.ceil(n_loc + 8.0 * math.sqrt(n_loc) + 24.0))


def garding_probe(
    symbol: TrigPolynomial,
    hbars: Sequence[float],
    cutoff: int = 64,
    torus_points: int = 100,
) -> GardingReport:
    """Lowest eigenvalue of the quantized nonnegative symbol versus hbar.

    The symbol must be a classical polynomial over the single-mode grid
    with (near-)Gaussian-integer generators; nonnegativity is certified by
    sampling on a torus_points^2 grid of the unit periodicity cell and
    Newton-polishing the minimum.  Per hbar the plain quantization
    sum_j c_j W_h(z_j) is assembled as a dense matrix on an adaptively
    enlarged truncation (``cutoff`` is only a floor), compressed to the
    trusted lower half, and its lowest eigenvalue recorded together with
    the anti-Wick variant (positive by construction).  The rate constant C
    is fitted through the origin to lambda_min - min(symbol) over the
    smaller half of the hbar ladder, where the linear law has set in; the
    spectral bottom then obeys min(symbol) - C hbar <= lambda_min <=
    min(symbol) + C hbar (residual reported) and nothing converges faster
    than that O(hbar) rate.
    """
    if symbol.hbar != 0.0:
        raise ValueError("the Garding probe quantizes a classical symbol")
    if symbol.grid.size != 1:
        raise ValueError("the probe works over the single-mode grid")
    gens = np.array([t.generator.function.values[0] for t in symbol.terms])
    coeffs = np.array([t.coefficient for t in symbol.terms])
    lattice = np.round(gens.real) + 1j * np.round(gens.imag)
    if np.max(np.abs(gens - lattice)) > 1e-12:
        raise ValueError(
            "positivity sampling needs Gaussian-integer generators "
            "(torus periodicity)"
        )
    xs = np.arange(torus_points) / torus_points
    x, y = np.meshgrid(xs, xs, indexing="ij")
    values = np.zeros_like(x, dtype=np.complex128)
    for c, z in zip(coeffs, lattice):
        values += c * np.exp(2j * _PI * (z.real * x + z.imag * y))
    if float(np.max(np.abs(values.imag))) > 1e-12:
        raise ValueError("symbol is not a real phase-space function")
    flat = int(np.argmin(values.real))
    sym_min = _refine_torus_min(
        coeffs, lattice, x.ravel()[flat], y.ravel()[flat]
    )
    if sym_min < -1e-9:
        raise ValueError(
            f"symbol is not a nonnegative phase-space function (min {sym_min:.3e})"
        )

    if len(hbars) == 0:
        raise ValueError("need at least one hbar value")
    lams: list[float] = []
    lams_aw: list[float] = []
    cutoffs: list[int] = []
    for h in hbars:
        n_h = _garding_cutoff(float(h), cutoff)
        cutoffs.append(n_h)
        half = slice(0, n_h // 2 + 1)
        mode = FockMode(omega=1.0, coupling=0.0, cutoff=n_h, hbar=float(h))
        q = np.zeros((mode.dim, mode.dim), dtype=np.complex128)
        mats = {}
        for c, z in zip(coeffs, gens):
            mats[complex(z)] = weyl_matrix(mode, complex(z))
            q += c * mats[complex(z)]
        aw = antiwick(symbol, float(h))
        q_aw = np.zeros_like(q)
        for term in aw.terms:
            z = complex(term.generator.function.values[0])
            q_aw += term.coefficient * mats[z]
        for name, mat in (("plain", q), ("anti-Wick", q_aw)):
            defect = float(np.max(np.abs(mat - mat.conj().T)))
            if defect > 1e-10:
                raise RuntimeError(
                    f"{name} quantization is not Hermitian (defect {defect:.3e})"
                )
        lams.append(float(np.linalg.eigvalsh(0.5 * (q + q.conj().T)[half, half])[0]))
        lams_aw.append(
            float(np.linalg.eigvalsh(0.5 * (q_aw + q_aw.conj().T)[half, half])[0])
        )

    hs = np.asarray(hbars, dtype=np.float64)
    gaps = np.abs(np.asarray(lams) - sym_min)
    order = np.argsort(hs)
    tail = order[: max(3, hs.size // 2)] if hs.size >= 3 else order
    denom = float(np.sum(hs[tail] ** 2))
    constant = float(np.sum(gaps[tail] * hs[tail]) / denom) if denom > 0 else 0.0
    top = float(gaps[tail].max())
    residual = (
        float(np.max(np.abs(gaps[tail] - constant * hs[tail])) / top)
        if top > 0.0
        else 0.0
    )
    return GardingReport(
        hbar_values=tuple(float(h) for h in hbars),
        lambda_min=tuple(lams),
        lambda_min_antiwick=tuple(lams_aw),
        cutoffs=tuple(cutoffs),
        fitted_constant=constant,
        fit_residual=residual,
        symbol_min=sym_min,
    )
