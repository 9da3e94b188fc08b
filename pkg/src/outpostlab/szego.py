"""Two-curve Szego kernels, mode statistics, and boundary functionals.

All mode formulas are written in the phi_1 frame, where the droplet boundary
C_1 maps to the unit circle and the outpost curve C_2 to the circle of radius
rho2.  The mode basis is

    F_j(z) = sqrt(phi_1'(z)) phi_1(z)^{-j} exp(h_1(z)/2),  j >= 1,

orthogonal on each curve under the arclength measure |dq| / sqrt(lap Q(q)),
with the curve-2 side carrying the weight exp(-c).  The two-curve kernel is
S(z, w) = sum_j F_j(z) conj(F_j(w)) / k_j with k_j the total squared norms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import (
    NonConvergent,
    OutsideDomainD,
    PreconditionViolated,
    QuadratureNotConverged,
    TooCloseToDiagonalCircle,
)
from .potential import PotentialModel

_JMAX = 512
_DIAG_TOL = 1e-9


class SignConvention(str, Enum):
    """Relative weight of the curve-2 norm: exp(-c) under MINUS_C."""

    MINUS_C = "minus_c"
    PLUS_C = "plus_c"


def mode_odds(theta: float, q: float, kmax: int | None = None, tol: float = 1e-18) -> np.ndarray:
    """Bernoulli odds theta * q^k of the outpost mode occupancies, k = 0, 1, ..."""
    if kmax is None:
        kmax = max(8, int(math.log(tol / max(theta, tol)) / math.log(q)) + 2) if q < 1 else 8
    return theta * q ** np.arange(kmax)


def heine_pmf(theta: float, q: float, tol: float = 1e-18) -> np.ndarray:
    """Distribution of the outpost count: sum of independent Bernoulli(o/(1+o))."""
    odds = mode_odds(theta, q, tol=tol)
    coeffs = np.array([1.0])
    for o in odds:
        nxt = np.zeros(len(coeffs) + 1)
        nxt[:-1] = coeffs
        nxt[1:] += o * coeffs
        coeffs = nxt
    return coeffs / coeffs.sum()


def heine_mean(theta: float, q: float, tol: float = 1e-18) -> float:
    odds = mode_odds(theta, q, tol=tol)
    return float(np.sum(odds / (1.0 + odds)))


def heine_var(theta: float, q: float, tol: float = 1e-18) -> float:
    p = mode_odds(theta, q, tol=tol)
    p = p / (1.0 + p)
    return float(np.sum(p * (1.0 - p)))


@dataclass(frozen=True)
class SzegoContext:
    model: PotentialModel
    sign: SignConvention = SignConvention.MINUS_C
    diag_tol: float = _DIAG_TOL

    @classmethod
    def from_model(cls, model: PotentialModel, sign=SignConvention.MINUS_C) -> "SzegoContext":
        if not model.has_outpost:
            raise ValueError("Szego context requires a model with an outpost curve")
        return cls(model=model, sign=SignConvention(sign))

    @property
    def rho2(self) -> float:
        return self.model.geom.rho2

    @property
    def ce(self) -> float:
        """Effective constant: the curve-2 norm weight is exp(-ce)."""
        c = self.model.c
        return c if self.sign is SignConvention.MINUS_C else -c

    @property
    def theta(self) -> float:
        return math.exp(-self.ce) / self.rho2

    @property
    def q(self) -> float:
        return self.rho2 ** (-2)

    @cached_property
    def mu(self) -> float:
        """Expected outpost count in the scaling limit."""
        return heine_mean(self.theta, self.q)

    def pmf(self) -> np.ndarray:
        return heine_pmf(self.theta, self.q)

    # -- mode weights, j >= 1 ----------------------------------------------------

    def k_norm(self, j):
        """Total squared norm of F_j over both curves (unit-circle scale)."""
        return 2 * math.pi * (1.0 + math.exp(-self.ce) * self.rho2 ** (1 - 2 * np.asarray(j)))

    def W11(self, j):
        """Curve-1 share of the F_j norm; W11 + W22 = 1."""
        return 1.0 / (1.0 + math.exp(-self.ce) * self.rho2 ** (1 - 2 * np.asarray(j)))

    def W22(self, j):
        return 1.0 / (1.0 + math.exp(self.ce) * self.rho2 ** (2 * np.asarray(j) - 1))

    def u(self, j):
        """Exterior-kernel correction weight, u_j = 1 - W11_j."""
        return self.W22(j)

    # -- kernel evaluation ---------------------------------------------------------

    def _sqrt_dphi1(self, z):
        return cmath.sqrt(complex(self.model.frame.dphi1(z)))

    def _prefactor(self, z, w) -> complex:
        m = self.model
        hz = complex(m.h1_at(z))
        hw = complex(m.h1_at(w))
        return (
            self._sqrt_dphi1(z)
            * self._sqrt_dphi1(w).conjugate()
            * cmath.exp(0.5 * (hz + hw.conjugate()))
        )

    def _x(self, z, w) -> complex:
        return complex(self.model.frame.phi1(z)) * complex(self.model.frame.phi1(w)).conjugate()

    def _check_domain(self, z, w):
        lo = 1.0 / self.rho2 + 1e-9
        for pt in (z, w):
            if abs(complex(self.model.frame.phi1(pt))) <= lo:
                raise OutsideDomainD(
                    f"point {pt} has |phi_1| <= {lo:.6g}; the extended kernel "
                    "is not defined this deep inside the droplet"
                )

    def s1(self, z, w) -> complex:
        """One-curve exterior kernel (droplet boundary alone)."""
        x = self._x(z, w)
        if abs(x - 1.0) < self.diag_tol:
            raise TooCloseToDiagonalCircle(f"|x - 1| = {abs(x - 1):.3e} at z={z}, w={w}")
        return self._prefactor(z, w) / (2 * math.pi) / (x - 1.0)

    def _sum_series(self, x: complex, weight) -> complex:
        """sum_{j>=1} x^{-j} weight(j), truncated when the tail is negligible."""
        acc = 0.0 + 0.0j
        xr = 1.0 / x
        pw = 1.0 + 0.0j
        small = 0
        for j in range(1, _JMAX + 1):
            pw *= xr
            term = pw * weight(j)
            acc += term
            if abs(term) <= 1e-17 * max(abs(acc), 1e-300):
                small += 1
                if small >= 3:
                    return acc
            else:
                small = 0
        raise NonConvergent(f"mode series did not settle within {_JMAX} terms (|x|={abs(x):.4f})")

    def s12(self, z, w, route: str = "auto") -> complex:
        """Two-curve kernel S(z, w) = sum_j F_j(z) conj(F_j(w)) / k_j."""
        self._check_domain(z, w)
        x = self._x(z, w)
        if abs(x - 1.0) < self.diag_tol:
            raise TooCloseToDiagonalCircle(f"|x - 1| = {abs(x - 1):.3e} at z={z}, w={w}")
        if route == "auto":
            route = "series" if abs(x) >= 1.1 else "extend"
        pref = self._prefactor(z, w)
        if route == "series":
            if abs(x) <= 1.0 + 1e-12:
                raise NonConvergent(f"direct mode series needs |x| > 1, got {abs(x):.6f}")
            return pref / (2 * math.pi) * self._sum_series(x, self.W11)
        if route == "extend":
            corr = pref / (2 * math.pi) * self._sum_series(x, self.u)
            return self.s1(z, w) - corr
        if route == "cross":
            # curve-2 normalization of the same modes, summed through W22
            if abs(x) <= 1.0 + 1e-12:
                raise NonConvergent(f"cross-curve series needs |x| > 1, got {abs(x):.6f}")
            ec = math.exp(self.ce)
            return (
                pref
                / (2 * math.pi)
                * self._sum_series(x, lambda j: ec * self.rho2 ** (2 * j - 1) * self.W22(j))
            )
        if route == "mixed":
            # geometric mean of the two normalizations
            if abs(x) <= 1.0 + 1e-12:
                raise NonConvergent(f"mixed-norm series needs |x| > 1, got {abs(x):.6f}")
            ec2 = math.exp(0.5 * self.ce)
            return (
                pref
                / (2 * math.pi)
                * self._sum_series(
                    x,
                    lambda j: ec2
                    * self.rho2 ** (j - 0.5)
                    * math.sqrt(self.W11(j) * self.W22(j)),
                )
            )
        raise ValueError(f"unknown route {route!r}")

    def s12_diag_curve2(self, p) -> float:
        """S(p, p) for p on the outpost curve, via the mode occupancy series."""
        m = self.model
        if abs(abs(complex(m.frame.phi1(p))) - self.rho2) > 1e-8 * self.rho2:
            raise PreconditionViolated(f"point {p} does not lie on the outpost curve")
        dphi2 = abs(complex(m.frame.dphi1(p))) / self.rho2
        return dphi2 * math.sqrt(m.t0) * self.mu / (2 * math.pi)

    # -- boundary functionals --------------------------------------------------------

    def _check_exterior(self, z) -> float:
        """Boundary functionals need the evaluation point outside the droplet."""
        a = abs(complex(self.model.frame.phi1(z)))
        if a <= 1.0 + 1e-9:
            raise OutsideDomainD(
                f"evaluation point {z} has |phi_1| = {a:.6g}; boundary "
                "functionals need |phi_1| > 1"
            )
        return a

    def berezin_masses(self, z) -> tuple[float, float]:
        """Limiting boundary-measure masses (curve 1, curve 2) seen from z."""
        a = self._check_exterior(z)
        num1 = num2 = den = 0.0
        for j in range(1, _JMAX + 1):
            base = a ** (-2 * j) / float(self.k_norm(j))
            w11 = float(self.W11(j))
            num1 += base * w11
            num2 += base * (1.0 - w11)
            den += base
            if base <= 1e-18 * den and j > 4:
                break
        return num1 / den, num2 / den

    def _curve_quadrature(self, curve: int, m: int):
        """Nodes and weights for |dw| exp(-Re h_1), the norm measure of the modes.

        With the droplet-consistent constants this equals arclength over
        sqrt(lap Q) on both curves; the curve-2 factor exp(-ce) carries the
        sign convention.
        """
        model = self.model
        rho = 1.0 if curve == 1 else self.rho2
        th = 2 * np.pi * np.arange(m) / m
        wpts = rho * np.exp(1j * th)
        q = np.array([complex(model.frame.psi(ww)) for ww in wpts])
        dpsi = np.array([abs(complex(model.frame.dpsi(ww))) for ww in wpts])
        hvals = np.array([complex(model.h1_at(qq)).real for qq in q])
        weights = dpsi * rho * (2 * np.pi / m) * np.exp(-hvals)
        if curve == 2:
            weights = weights * math.exp(-self.ce)
        return q, weights

    def berezin_apply(self, f, z, tol: float = 1e-10, m0: int = 64) -> tuple[complex, complex]:
        """Curve-wise reproducing action (b1, b2); b1 + b2 = f(z) for trace data."""
        self._check_exterior(z)
        vals = []
        for curve in (1, 2):
            prev = None
            m = m0
            while True:
                qs, ws = self._curve_quadrature(curve, m)
                total = sum(
                    w * f(q) * self.s12(z, q) for q, w in zip(qs, ws)
                )
                if prev is not None and abs(total - prev) <= tol * max(1.0, abs(total)):
                    vals.append(total)
                    break
                prev = total
                m *= 2
                if m > 16384:
                    raise QuadratureNotConverged(
                        f"boundary quadrature on curve {curve} still moving at m={m // 2}"
                    )
        return vals[0], vals[1]

    def berezin_measure_masses(
        self, z, tol: float = 1e-10, m0: int = 64
    ) -> tuple[float, float]:
        """Masses of the positive boundary measure |S(z, .)|^2 dm / S(z, z)."""
        self._check_exterior(z)
        szz = self.s12(z, z).real
        out = []
        for curve in (1, 2):
            prev = None
            m = m0
            while True:
                qs, ws = self._curve_quadrature(curve, m)
                total = sum(w * abs(self.s12(z, q)) ** 2 for q, w in zip(qs, ws))
                if prev is not None and abs(total - prev) <= tol * max(1.0, abs(total)):
                    out.append(total / szz)
                    break
                prev = total
                m *= 2
                if m > 16384:
                    raise QuadratureNotConverged(
                        f"boundary quadrature on curve {curve} still moving at m={m // 2}"
                    )
        return out[0], out[1]
