"""Polynomial smoothing kernels on [-1, 1] built from Legendre sums.

Convention: all moments and constants are expectations with respect to
r ~ Uniform[-1, 1], i.e. (1/2) * integral over [-1, 1]. Under this reading
the shipped closed forms (3r, ...) satisfy E[rK(r)] = 1 exactly, which is
what makes the kernel gradient estimator unbiased through first order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt

import numpy as np
from scipy.integrate import quad

from .core import ConfigurationError

MOMENT_TOL = 1e-10
MAX_BETA = 7.0


class UnsupportedOrderError(ConfigurationError):
    """Requested smoothness order outside the shipped kernel range (2, 7]."""


def _legendre_monomial(m: int) -> list[Fraction]:
    """Monomial coefficients (ascending) of the Legendre polynomial L_m."""
    prev = [Fraction(1)]
    if m == 0:
        return prev
    cur = [Fraction(0), Fraction(1)]
    for j in range(1, m):
        # (j+1) L_{j+1} = (2j+1) r L_j - j L_{j-1}
        nxt = [Fraction(0)] * (j + 2)
        for i, c in enumerate(cur):
            nxt[i + 1] += Fraction(2 * j + 1, j + 1) * c
        for i, c in enumerate(prev):
            nxt[i] -= Fraction(j, j + 1) * c
        prev, cur = cur, nxt
    return cur


def _poly_derivative_at_zero(coeffs: list[Fraction]) -> Fraction:
    return coeffs[1] if len(coeffs) > 1 else Fraction(0)


def _exact_moment(coeffs: list[Fraction], j: int) -> Fraction:
    """E[r^j * P(r)] for r ~ Uniform[-1,1], P given by monomial coeffs."""
    total = Fraction(0)
    for i, c in enumerate(coeffs):
        k = i + j
        if k % 2 == 0:
            total += c * Fraction(1, k + 1)
    return total


@dataclass(frozen=True)
class SmoothingKernel:
    """Degree-l polynomial kernel with certified moments and constants."""

    beta: float
    l: int
    coeffs: tuple[float, ...]            # monomial basis, ascending powers
    kappa: float                         # E[K^2(r)]
    kappa_beta: float                    # E[|r|^beta |K(r)|]
    exact_coeffs: tuple[Fraction, ...] = ()

    def __call__(self, r):
        return np.polynomial.polynomial.polyval(r, np.asarray(self.coeffs))


def kernel_moment(kernel: SmoothingKernel, j: int) -> float:
    """Exact E[r^j K(r)] by closed-form monomial integration."""
    if j < 0:
        raise ValueError("moment order must be >= 0")
    coeffs = kernel.exact_coeffs or tuple(
        Fraction(c).limit_denominator(10**12) for c in kernel.coeffs)
    return float(_exact_moment(list(coeffs), j))


def _kappa_exact(coeffs: list[Fraction]) -> Fraction:
    squared = [Fraction(0)] * (2 * len(coeffs) - 1)
    for i, a in enumerate(coeffs):
        for k, b in enumerate(coeffs):
            squared[i + k] += a * b
    return _exact_moment(squared, 0)


def _kappa_beta_numeric(coeffs: list[Fraction], beta: float) -> float:
    """E[|r|^beta |K(r)|], split at the roots of K where |K| has kinks."""
    poly = np.array([float(c) for c in coeffs[::-1]])
    roots = np.roots(poly) if len(poly) > 1 else np.array([])
    cuts = sorted({0.0, 1.0} | {
        float(r.real) for r in roots
        if abs(r.imag) < 1e-12 and 0.0 < r.real < 1.0})
    val = np.polynomial.polynomial.Polynomial(
        np.array([float(c) for c in coeffs]))

    def integrand(r):
        return r ** beta * abs(val(r))

    total = 0.0
    # K is odd so the integrand is even: expectation = integral over [0, 1]
    for a, b in zip(cuts[:-1], cuts[1:]):
        piece, err = quad(integrand, a, b, epsabs=1e-12, epsrel=1e-12)
        if err > 1e-9:
            raise ArithmeticError(
                f"kappa_beta integration achieved only {err:.2e} abs error")
        total += piece
    return total


def kernel_constant(kernel: SmoothingKernel, which: str) -> float:
    if which == "kappa":
        coeffs = list(kernel.exact_coeffs) if kernel.exact_coeffs else [
            Fraction(c).limit_denominator(10**12) for c in kernel.coeffs]
        return float(_kappa_exact(coeffs))
    if which == "kappa_beta":
        coeffs = list(kernel.exact_coeffs) if kernel.exact_coeffs else [
            Fraction(c).limit_denominator(10**12) for c in kernel.coeffs]
        return _kappa_beta_numeric(coeffs, kernel.beta)
    raise ConfigurationError(f"unknown kernel constant {which!r}")


def max_moment_residual(kernel: SmoothingKernel) -> float:
    """Largest violation of the moment certificates up to order l."""
    worst = abs(kernel_moment(kernel, 0))
    worst = max(worst, abs(kernel_moment(kernel, 1) - 1.0))
    for j in range(2, kernel.l + 1):
        worst = max(worst, abs(kernel_moment(kernel, j)))
    return worst


def build_legendre_kernel(beta: float) -> SmoothingKernel:
    """Kernel K_beta(r) = sum_{m<=l} p_m'(0) p_m(r), p_m = sqrt(2m+1) L_m.

    Since p_m'(0) p_m(r) = (2m+1) L_m'(0) L_m(r), the coefficients are exact
    rationals; even m contribute nothing (L_m'(0) = 0), so the kernel is odd.
    """
    if not (2.0 < beta <= MAX_BETA):
        raise UnsupportedOrderError(
            f"beta must lie in (2, {MAX_BETA}], got {beta}")
    # l = max integer strictly below beta
    l = int(np.floor(beta))
    if float(beta) == l:
        l -= 1

    coeffs = [Fraction(0)] * (l + 1)
    for m in range(l + 1):
        lm = _legendre_monomial(m)
        dp0 = _poly_derivative_at_zero(lm)
        if dp0 == 0:
            continue
        w = Fraction(2 * m + 1) * dp0
        for i, c in enumerate(lm):
            coeffs[i] += w * c

    residual = max(
        abs(float(_exact_moment(coeffs, 1) - 1)),
        abs(float(_exact_moment(coeffs, 0))),
        max((abs(float(_exact_moment(coeffs, j))) for j in range(2, l + 1)),
            default=0.0),
    )
    if residual > MOMENT_TOL:
        raise ArithmeticError(
            f"moment certificate failed for beta={beta}: residual {residual:.2e}")

    kernel = SmoothingKernel(
        beta=float(beta), l=l,
        coeffs=tuple(float(c) for c in coeffs),
        kappa=float(_kappa_exact(coeffs)),
        kappa_beta=_kappa_beta_numeric(coeffs, float(beta)),
        exact_coeffs=tuple(coeffs),
    )
    return kernel


def kappa_bound(beta: float) -> float:
    """Literature bound sqrt(3) beta^(3/2) on kappa."""
    return sqrt(3.0) * beta ** 1.5


def kappa_beta_bound(beta: float) -> float:
    """Literature bound 2 sqrt(2) (beta - 1) on kappa_beta."""
    return 2.0 * sqrt(2.0) * (beta - 1.0)
