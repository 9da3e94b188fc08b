"""Independent reference computations used to freeze expected test values.

Each function recomputes a quantity through a route disjoint from the package
implementation: different root finder, different quadrature, different series.
Tests compare package output against these, or against constants frozen from
running these once at higher precision.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np


def quartic_roots(alpha: float, r1: float) -> list[complex]:
    """Roots of r1^2 w^4 - 2 r1 w^3 - alpha w^2 - 2 r1 w + 4 via mpmath."""
    with mp.workdps(40):
        rs = mp.polyroots([r1 * r1, -2 * r1, -alpha, -2 * r1, 4.0], maxsteps=200)
        return [complex(r) for r in rs]


def univalent_real_roots(alpha: float, r1: float, m: int = 1440) -> list[float]:
    """Real quartic roots whose map is injective on the closed unit disk."""
    out = []
    for root in quartic_roots(alpha, r1):
        if abs(root.imag) > 1e-9 * max(1.0, abs(root)):
            continue
        w0 = root.real
        if abs(w0) <= 1.0:
            continue
        p = 1.0 / w0
        b = (2.0 / r1) * (w0 * w0 - 1.0) / (w0 * w0)

        def psi(w):
            return r1 * w * (w - w0 + b) / (w - p)

        # critical points: numerator of psi' is w^2 - 2 p w + p (w0 - b)
        disc = complex(p * p - p * (w0 - b)) ** 0.5
        if not all(abs(p + s * disc) < 1.0 - 1e-9 for s in (+1, -1)):
            continue
        th = np.linspace(0, 2 * np.pi, m, endpoint=False)
        bd = np.array([psi(complex(np.exp(1j * t))) for t in th])
        d = np.abs(bd[:, None] - bd[None, :])
        np.fill_diagonal(d, np.inf)
        ang = np.abs(th[:, None] - th[None, :])
        ang = np.minimum(ang, 2 * np.pi - ang)
        # injectivity: distant parameter angles never map to nearby points
        if np.min(d[ang > 0.15]) > 1e-6:
            out.append(w0)
    return out


def qseries_pmf(theta: float, q: float, kmax: int = 40) -> np.ndarray:
    """Counting law from the q-binomial identity, independent of convolution."""
    with mp.workdps(60):
        th, qq = mp.mpf(theta), mp.mpf(q)
        denom = mp.mpf(1)
        j = 0
        while True:
            f = 1 + th * qq**j
            denom *= f
            if f - 1 < mp.mpf(10) ** -50:
                break
            j += 1
        pmf = []
        for k in range(kmax):
            poch = mp.mpf(1)
            for i in range(1, k + 1):
                poch *= 1 - qq**i
            pmf.append(th**k * qq ** (k * (k - 1) // 2) / poch / denom)
        return np.array([float(p) for p in pmf])


def qseries_mean(theta: float, q: float) -> float:
    """Mean of the counting law as a sum of Bernoulli means."""
    with mp.workdps(50):
        th, qq = mp.mpf(theta), mp.mpf(q)
        acc = mp.mpf(0)
        k = 0
        while True:
            o = th * qq**k
            term = o / (1 + o)
            acc += term
            if term < mp.mpf(10) ** -40:
                break
            k += 1
        return float(acc)


def gauss_log_norm(j: int, n: int) -> float:
    """log of the j-th monomial norm under the pure Gaussian weight."""
    return math.lgamma(j + 1) - (j + 1) * math.log(n)


def radial_log_norm_quad(model, n: int, j: int) -> float:
    """Mode norm by adaptive tanh-sinh quadrature at raised precision."""
    need = int(math.ceil(n * 4 / math.log(2))) + 80
    with mp.workprec(need):
        total = mp.mpf(0)
        for a, b in model.radial_support_cells():
            f = lambda r: 2 * r ** (2 * j + 1) * mp.exp(-n * model.radial_Q(r))
            total += mp.quad(f, [mp.mpf(a), mp.mpf(b)])
        return float(mp.log(total))


def ellipse_semiaxes(rho: float, alpha: float) -> tuple[float, float]:
    """Axis lengths of the curve rho (e^(i t) - alpha e^(-i t))."""
    return rho * (1 - alpha), rho * (1 + alpha)


def poisson_binomial_dft(ps: np.ndarray) -> np.ndarray:
    """Bernoulli-sum law via the characteristic function at roots of unity."""
    ps = np.asarray(ps, dtype=float)
    m = len(ps) + 1
    omega = np.exp(2j * np.pi * np.arange(m) / m)
    phi = np.array([np.prod(1 - ps + ps * w) for w in omega])
    pmf = np.fft.fft(phi).real / m
    return np.clip(pmf, 0.0, None)


def disk_area_moment(frame, m: int = 8192) -> float:
    """Image area of the unit disk, in the normalized measure, via Green's theorem."""
    th = np.linspace(0, 2 * np.pi, m, endpoint=False)
    z = np.array([complex(frame.psi(complex(np.exp(1j * t)))) for t in th])
    dz = np.roll(z, -1) - z
    return float(np.imag(np.sum(np.conj(z) * dz)) / (2 * np.pi))
