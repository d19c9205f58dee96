r"""Exponential (Weyl) elements and their *-algebra of trigonometric polynomials.

A generator is a grid function f; the abstract element W_h(f) obeys

    W_h(f) W_h(g) = W_h(f + g) exp(-i pi^2 h sigma(f, g)),
    W_h(f)^*      = W_h(-f),          sigma(f, g) = Im <f, g>_0,

with h >= 0 the semiclassical parameter.  At h = 0 the algebra is abelian
and W_0(f) is the phase-space character T -> exp(2 pi i Re <f, T>_0).

Elements here are finite sums sum_j c_j W_h(f_j) ("trigonometric
polynomials") in canonical form: duplicate generators merged by bit-exact
sample equality, zero coefficients dropped, terms ordered by generator key.
The l^1 coefficient norm is an upper bound for the C*-norm (each W is
unitary), which is all the norm control the workbench needs.

Quantization maps a classical polynomial to the same coefficients at h > 0;
the anti-Wick variant additionally damps each coefficient by
exp(-(pi^2 h / 2) ||f_j||_0^2) and is positivity-preserving.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .grid import (
    MomentumGrid,
    RadialFunction,
    inner_product,
    weighted_norm_sq,
    zero_function,
)

__all__ = [
    "FunctionHandle",
    "WeylTerm",
    "TrigPolynomial",
    "handle",
    "weyl",
    "identity",
    "trig_polynomial",
    "symplectic_form",
    "compose",
    "adjoint",
    "scale",
    "add",
    "quantize",
    "antiwick",
    "norm_bound",
]

_PI2 = math.pi**2


@dataclass(frozen=True, eq=False)
class FunctionHandle:
    """Content-addressed identity for a generator (bit-exact samples)."""

    function: RadialFunction
    key: tuple[int, bytes]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FunctionHandle) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)


def handle(f: RadialFunction) -> FunctionHandle:
    digest = hashlib.blake2b(f.values.tobytes(), digest_size=16).digest()
    return FunctionHandle(function=f, key=(id(f.grid), digest))


@dataclass(frozen=True)
class WeylTerm:
    coefficient: complex
    generator: FunctionHandle


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Canonical finite sum of Weyl elements at a fixed h >= 0."""

    hbar: float
    grid: MomentumGrid
    terms: tuple[WeylTerm, ...]

    def __post_init__(self) -> None:
        if self.hbar < 0.0:
            raise ValueError(f"hbar must be >= 0, got {self.hbar}")


def trig_polynomial(
    grid: MomentumGrid, hbar: float, terms: Iterable[WeylTerm]
) -> TrigPolynomial:
    """Canonicalize: merge duplicate generators, drop zeros, sort by key."""
    merged: dict[tuple[int, bytes], WeylTerm] = {}
    for term in terms:
        gen = term.generator
        if gen.function.grid is not grid:
            raise ValueError("term generator lives on a different grid")
        prev = merged.get(gen.key)
        if prev is None:
            merged[gen.key] = term
        else:
            merged[gen.key] = WeylTerm(prev.coefficient + term.coefficient, prev.generator)
    kept = tuple(
        sorted(
            (t for t in merged.values() if t.coefficient != 0.0),
            key=lambda t: t.generator.key[1],
        )
    )
    return TrigPolynomial(hbar=float(hbar), grid=grid, terms=kept)


def weyl(f: RadialFunction, hbar: float, coefficient: complex = 1.0) -> TrigPolynomial:
    """Single Weyl element c * W_h(f)."""
    return trig_polynomial(f.grid, hbar, [WeylTerm(complex(coefficient), handle(f))])


def identity(grid: MomentumGrid, hbar: float) -> TrigPolynomial:
    """W_h(0), the algebra unit."""
    return weyl(zero_function(grid), hbar)


def symplectic_form(f: RadialFunction, g: RadialFunction) -> float:
    """sigma(f, g) = Im <f, g>_0."""
    return inner_product(f, g, 0).imag


def compose(a: TrigPolynomial, b: TrigPolynomial) -> TrigPolynomial:
    """Product in the Weyl algebra (pointwise product of characters at h=0)."""
    if a.grid is not b.grid:
        raise ValueError("cannot compose polynomials on different grids")
    if a.hbar != b.hbar:
        raise ValueError(f"hbar mismatch: {a.hbar} vs {b.hbar}")
    out: list[WeylTerm] = []
    for ta in a.terms:
        for tb in b.terms:
            coeff = ta.coefficient * tb.coefficient
            if a.hbar > 0.0:
                s = symplectic_form(ta.generator.function, tb.generator.function)
                coeff *= np.exp(-1j * _PI2 * a.hbar * s)
            gen = handle(ta.generator.function + tb.generator.function)
            out.append(WeylTerm(coeff, gen))
    return trig_polynomial(a.grid, a.hbar, out)


def adjoint(a: TrigPolynomial) -> TrigPolynomial:
    """Conjugate coefficients, negate generators."""
    return trig_polynomial(
        a.grid,
        a.hbar,
        [
            WeylTerm(np.conj(t.coefficient), handle(-t.generator.function))
            for t in a.terms
        ],
    )


def add(a: TrigPolynomial, b: TrigPolynomial) -> TrigPolynomial:
    if a.grid is not b.grid:
        raise ValueError("cannot add polynomials on different grids")
    if a.hbar != b.hbar:
        raise ValueError(f"hbar mismatch: {a.hbar} vs {b.hbar}")
    return trig_polynomial(a.grid, a.hbar, a.terms + b.terms)


def scale(a: TrigPolynomial, c: complex) -> TrigPolynomial:
    return trig_polynomial(
        a.grid, a.hbar, [WeylTerm(complex(c) * t.coefficient, t.generator) for t in a.terms]
    )


def quantize(a: TrigPolynomial, hbar: float) -> TrigPolynomial:
    """Retag a classical polynomial at h > 0, coefficients unchanged."""
    if a.hbar != 0.0:
        raise ValueError("quantization starts from a classical (hbar = 0) polynomial")
    if hbar <= 0.0:
        raise ValueError(f"target hbar must be > 0, got {hbar}")
    return TrigPolynomial(hbar=float(hbar), grid=a.grid, terms=a.terms)


def antiwick(a: TrigPolynomial, hbar: float) -> TrigPolynomial:
    """Positivity-preserving quantization: coefficients damped by the
    vacuum Gaussian exp(-(pi^2 hbar / 2) ||f||_0^2)."""
    if a.hbar != 0.0:
        raise ValueError("anti-Wick quantization starts from hbar = 0")
    if hbar <= 0.0:
        raise ValueError(f"target hbar must be > 0, got {hbar}")
    terms = [
        WeylTerm(
            t.coefficient
            * math.exp(-0.5 * _PI2 * hbar * weighted_norm_sq(t.generator.function, 0)),
            t.generator,
        )
        for t in a.terms
    ]
    return trig_polynomial(a.grid, hbar, terms)


def norm_bound(a: TrigPolynomial) -> float:
    """l^1 coefficient norm; an upper bound for the C*-norm."""
    return float(sum(abs(t.coefficient) for t in a.terms))
