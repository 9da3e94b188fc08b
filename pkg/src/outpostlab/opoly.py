"""Planar orthogonal polynomials, correlation kernels, and mode approximants.

Norms are computed in multiprecision against the weight exp(-n Q) dA with
dA = d^2 z / pi.  Rotation-invariant models use exact radial moment tables;
the other families go through a 2-D Gram matrix in a scaled monomial basis,
orthonormalized by a multiprecision Cholesky factorization.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp
import numpy as np

from ._mpquad import gauss_legendre, split_panels
from .errors import (
    InvalidGeometry,
    OutOfRegime,
    PrecisionBudgetExceeded,
    QuadratureNotConverged,
)
from .potential import GapFill, PotentialModel, tau_family

_LN2 = math.log(2.0)


def precision_bits(model: PotentialModel, n: int, margin: int = 96) -> int:
    """Working precision covering the dynamic range of exp(-n Q) on the support."""
    qs: list[float] = []
    if model.is_radial():
        for a, b in model.radial_support_cells():
            qs.extend(model.radial_Q_np(np.linspace(a, b, 33)).tolist())
    else:
        pts1 = model.curve_points(1, 64)
        z0 = pts1.mean()
        for tshrink in np.linspace(0.0, 1.0, 9):
            for z in z0 + tshrink * (pts1 - z0):
                qs.append(model.Q1(complex(z)))
        g = model.geom
        for s in np.linspace(g.gap_hi, g.cap_out, 9):
            for z in model.frame.boundary(s, 32):
                qs.append(model.Q(complex(z)))
    qs = [q for q in qs if math.isfinite(q)]
    spread = max(qs) - min(qs)
    return int(math.ceil(n * spread / _LN2)) + margin


# -- radial moment tables -----------------------------------------------------------


def _radial_panels(model: PotentialModel, n: int, halve: int = 1) -> list[tuple[float, float, int]]:
    """(a, b, region) integration panels resolving the exp(-n Q) scale."""
    width = 4.0 / math.sqrt(n) / halve
    split = model.split_radius if model.has_outpost else math.inf
    panels = []
    for a, b in model.radial_support_cells():
        region = 1 if b <= split else 2
        edges = split_panels([a, b], width)
        panels.extend((lo, hi, region) for lo, hi in zip(edges[:-1], edges[1:]))
    return panels


class RadialSpectralData:
    """Exact norms and kernels for rotation-invariant models: Phi_j(z) = z^j."""

    def __init__(self, model: PotentialModel, n: int):
        if not model.is_radial():
            raise OutOfRegime("radial moment tables need a rotation-invariant model")
        self.model = model
        self.n = int(n)
        self.prec = precision_bits(model, n)
        self._build()

    def _moments(self, halve: int):
        """Region-split moments 2 int r^(2j+1) exp(-n Q) dr over the support."""
        model, n = self.model, self.n
        order = 64
        xs, ws = gauss_legendre(order)
        m1 = [mp.mpf(0)] * n
        m2 = [mp.mpf(0)] * n
        for a, b, region in _radial_panels(model, n, halve):
            am, bm = mp.mpf(a), mp.mpf(b)
            half = (bm - am) / 2
            mid = (bm + am) / 2
            tgt = m1 if region == 1 else m2
            for x, w in zip(xs, ws):
                r = mid + half * x
                base = 2 * w * half * r * mp.exp(-n * model.radial_Q(r))
                r2 = r * r
                for j in range(n):
                    tgt[j] += base
                    base *= r2
        return m1, m2

    def _build(self):
        for attempt in range(3):
            with mp.workprec(self.prec):
                m1, m2 = self._moments(halve=1)
                m1r, m2r = self._moments(halve=2)
                base = [a + b for a, b in zip(m1, m2)]
                ref = [a + b for a, b in zip(m1r, m2r)]
                err = max(abs(r / b - 1) for r, b in zip(ref, base))
                if err <= mp.mpf(2) ** (-64):
                    self.moments = base
                    self.moments_refined = ref
                    self._m1, self._m2 = m1, m2
                    self.log_norms = np.array([float(mp.log(v)) for v in base])
                    return
            self.prec = int(self.prec * 1.5)
        raise QuadratureNotConverged(
            f"radial moment table at n={self.n} did not reach 2^-64 relative accuracy"
        )

    # -- derived quantities ---------------------------------------------------------

    def occupancies(self) -> np.ndarray:
        """Probability that mode j sits on the outpost side, j = 0..n-1."""
        with mp.workprec(self.prec):
            return np.array(
                [float(b / (a + b)) for a, b in zip(self._m1, self._m2)]
            )

    def trace_refined(self) -> float:
        """Kernel trace with independently refined norms; n up to quadrature error."""
        with mp.workprec(self.prec):
            return float(mp.fsum(r / b for r, b in zip(self.moments_refined, self.moments)))

    def log_norm(self, j: int) -> float:
        return float(self.log_norms[j])

    def kernel_point(self, z, w) -> complex:
        """K_n(z, w) including the weight exp(-n(Q(z) + Q(w))/2)."""
        z, w = complex(z), complex(w)
        qz = self.model.radial_Q(abs(z))
        qw = self.model.radial_Q(abs(w))
        if not (math.isfinite(qz) and math.isfinite(qw)):
            return 0.0 + 0.0j
        x = z * w.conjugate()
        shift = -0.5 * self.n * (qz + qw)
        if x == 0:
            return complex(math.exp(shift - self.log_norms[0]))
        lx = cmath.log(x)
        js = np.arange(self.n)
        expo = js * lx - self.log_norms + shift
        return complex(np.exp(expo).sum())

    def kernel_diag(self, rs: np.ndarray) -> np.ndarray:
        """K_n(r, r) along radii, vectorized."""
        rs = np.asarray(rs, dtype=float)
        q = self.model.radial_Q_np(rs)
        out = np.zeros_like(rs)
        ok = np.isfinite(q)
        lr = np.log(np.where(rs > 0, rs, 1.0))
        js = np.arange(self.n)[:, None]
        expo = 2 * js * lr[None, ok] - self.log_norms[:, None] - self.n * q[None, ok]
        vals = np.exp(expo).sum(axis=0)
        zero = ok & (rs == 0)
        out[ok] = vals
        if zero.any():
            out[zero] = np.exp(-self.log_norms[0] - self.n * q[zero])
        return out

    def mode_value(self, j: int, z) -> complex:
        """Weighted orthonormal mode e_j(z) = z^j exp(-n Q/2) / ||z^j||."""
        z = complex(z)
        q = self.model.radial_Q(abs(z))
        if not math.isfinite(q):
            return 0.0 + 0.0j
        if z == 0:
            return complex(math.exp(-0.5 * (self.log_norms[0] + self.n * q))) if j == 0 else 0.0 + 0.0j
        return complex(cmath.exp(j * cmath.log(z) - 0.5 * self.log_norms[j] - 0.5 * self.n * q))


# -- 2-D Gram path ------------------------------------------------------------------


def polar_2d(model: PotentialModel, n: int, refine: bool = False):
    """Quadrature nodes (z, weight) covering the finite-potential region.

    The droplet side is meshed by polar rays about the curve-1 centroid, the
    outpost band (and the gap band for the smooth fill) in the exterior-map
    annulus chart.  Node geometry is float; integrand values are lifted to
    multiprecision by the caller.
    """
    from scipy.optimize import brentq

    g = model.geom
    halve = 2 if refine else 1
    mtheta = max(128, 6 * n) * (3 if refine else 2) // 2
    order = 64
    xs, ws = np.polynomial.legendre.leggauss(order)
    nodes_z: list[complex] = []
    nodes_w: list[float] = []

    pts1 = model.curve_points(1, 256)
    z0 = complex(pts1.mean())
    rad_width = 4.0 / math.sqrt(n) / halve
    rmax_guess = float(np.abs(pts1 - z0).max()) * (1.0 + g.w_in) * 1.5

    def ray_cross(th: float) -> float:
        def f(r):
            return abs(complex(model.frame.phi1(z0 + r * cmath.exp(1j * th)))) - g.gap_lo

        rs = np.linspace(1e-6, rmax_guess, 64)
        vals = np.array([f(r) for r in rs])
        signs = np.sign(vals)
        crossings = np.nonzero(np.diff(signs) > 0)[0]
        if len(crossings) != 1 or vals[0] >= 0:
            raise InvalidGeometry(
                "droplet region is not star shaped about the curve centroid"
            )
        i = crossings[0]
        return float(brentq(f, rs[i], rs[i + 1], xtol=1e-14))

    for k in range(mtheta):
        th = 2 * math.pi * k / mtheta
        rmax = ray_cross(th)
        edges = split_panels([0.0, rmax], rad_width)
        eith = cmath.exp(1j * th)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half, mid = (hi - lo) / 2, (hi + lo) / 2
            for x, w in zip(xs, ws):
                r = mid + half * x
                nodes_z.append(z0 + r * eith)
                nodes_w.append(w * half * r * 2.0 / mtheta)

    bands = [(g.gap_hi, g.cap_out)]
    if model.gap_fill is GapFill.SMOOTH:
        bands.insert(0, (g.gap_lo, g.gap_hi))
    s_width = 4.0 / math.sqrt(n * max(1.0, model.t0)) / halve
    for s_lo, s_hi in bands:
        edges = split_panels([s_lo, g.rho2, s_hi] if s_lo < g.rho2 < s_hi else [s_lo, s_hi], s_width)
        for k in range(mtheta):
            ph = 2 * math.pi * k / mtheta
            eiph = cmath.exp(1j * ph)
            for lo, hi in zip(edges[:-1], edges[1:]):
                half, mid = (hi - lo) / 2, (hi + lo) / 2
                for x, w in zip(xs, ws):
                    s = mid + half * x
                    wpt = s * eiph
                    dpsi = abs(complex(model.frame.dpsi(wpt)))
                    nodes_z.append(complex(model.frame.psi(wpt)))
                    nodes_w.append(w * half * s * dpsi * dpsi * 2.0 / mtheta)
    return np.array(nodes_z), np.array(nodes_w)


class GramSpectralData:
    """Norms and kernels via a multiprecision Gram matrix in (z/s)^j."""

    def __init__(self, model: PotentialModel, n: int):
        self.model = model
        self.n = int(n)
        self.scale = model.cap
        self.prec = precision_bits(model, n)
        self._build()

    def _gram(self, nodes_z, nodes_w):
        n, s = self.n, self.scale
        G = [[mp.mpf(0)] * n for _ in range(n)]
        qvals = [self.model.Q(complex(z)) for z in nodes_z]
        for z, wgt, q in zip(nodes_z, nodes_w, qvals):
            if not math.isfinite(q):
                continue
            coef = mp.mpf(wgt) * mp.exp(-self.n * mp.mpf(q))
            t = mp.mpc(z) / s
            xs = [mp.mpf(1)]
            ys = [mp.mpf(0)]
            cur = mp.mpc(1)
            for _ in range(n - 1):
                cur *= t
                xs.append(cur.real)
                ys.append(cur.imag)
            for j in range(n):
                xj = xs[j] * coef
                yj = ys[j] * coef
                row = G[j]
                for k in range(j + 1):
                    row[k] += xj * xs[k] + yj * ys[k]
        for j in range(self.n):
            for k in range(j):
                G[k][j] = G[j][k]
        return mp.matrix(G)

    def _build(self):
        for attempt in range(3):
            with mp.workprec(self.prec):
                base_nodes = polar_2d(self.model, self.n)
                G = self._gram(*base_nodes)
                try:
                    L = mp.cholesky(G)
                except ValueError:
                    self.prec = int(self.prec * 1.5)
                    continue
                linv = mp.inverse(L)
                ref_nodes = polar_2d(self.model, self.n, refine=True)
                Gref = self._gram(*ref_nodes)
                A = linv * Gref * linv.T
                self._trace = float(mp.fsum(A[j, j] for j in range(self.n)))
                self.linv = linv
                self.log_norms = np.array(
                    [
                        2 * (j * math.log(self.scale) + float(mp.log(L[j, j])))
                        for j in range(self.n)
                    ]
                )
                return
        raise PrecisionBudgetExceeded(
            f"Gram factorization failed up to {self.prec} bits at n={self.n}"
        )

    def trace_refined(self) -> float:
        return self._trace

    def log_norm(self, j: int) -> float:
        return float(self.log_norms[j])

    def _poly_vector(self, z):
        """Orthonormal polynomial values p_j(z), multiprecision."""
        t = mp.mpc(complex(z)) / self.scale
        u = [mp.mpc(1)]
        for _ in range(self.n - 1):
            u.append(u[-1] * t)
        vals = []
        for j in range(self.n):
            acc = mp.mpc(0)
            for k in range(j + 1):
                acc += self.linv[j, k] * u[k]
            vals.append(acc)
        return vals

    def kernel_point(self, z, w) -> complex:
        q = self.model.Q(complex(z)) + self.model.Q(complex(w))
        if not math.isfinite(q):
            return 0.0 + 0.0j
        with mp.workprec(self.prec):
            pz = self._poly_vector(z)
            pw = self._poly_vector(w) if w != z else pz
            acc = mp.mpc(0)
            for a, b in zip(pz, pw):
                acc += a * mp.conj(b)
            return complex(acc * mp.exp(-mp.mpf(q) * self.n / 2))

    def mode_value(self, j: int, z) -> complex:
        q = self.model.Q(complex(z))
        if not math.isfinite(q):
            return 0.0 + 0.0j
        with mp.workprec(self.prec):
            pz = self._poly_vector(z)
            return complex(pz[j] * mp.exp(-mp.mpf(q) * self.n / 2))


_SPECTRAL_CACHE: dict = {}


def build_spectral(model: PotentialModel, n: int):
    """Session-cached spectral data for (model, n)."""
    key = (model, int(n))
    if key not in _SPECTRAL_CACHE:
        _SPECTRAL_CACHE[key] = (
            RadialSpectralData(model, n) if model.is_radial() else GramSpectralData(model, n)
        )
    return _SPECTRAL_CACHE[key]


# -- mode windows and approximants ----------------------------------------------------


@dataclass(frozen=True)
class ModeWindows:
    """Index ranges for the bulk (E), edge (F), and far-field approximants."""

    bulk: range
    edge: range
    far: range

    @property
    def far_empty(self) -> bool:
        return len(self.far) == 0


def mode_windows(n: int, c_bulk: float = 8.0) -> ModeWindows:
    lg = math.log(n)
    lg2 = lg * lg
    bulk_lo = max(1, math.ceil(n - c_bulk * math.sqrt(n * lg)))
    bulk_hi = math.floor(n - lg2)
    edge_lo = max(1, math.ceil(n - lg2))
    far_hi = math.floor(n - 8.0 * math.sqrt(n * lg))
    return ModeWindows(
        bulk=range(bulk_lo, max(bulk_lo, bulk_hi + 1)),
        edge=range(edge_lo, n),
        far=range(1, max(1, far_hi + 1)),
    )


@lru_cache(maxsize=256)
def _tau_data(model: PotentialModel, tau: float):
    return tau_family(model, tau)


def approx_mode_bulk(model: PotentialModel, n: int, j: int, z) -> complex:
    """Plancherel-type approximant for e_j at tau = j/n inside the bulk window."""
    if not 1 <= j < n:
        raise OutOfRegime(f"mode index {j} outside 1..{n - 1}")
    tau = j / n
    td = _tau_data(model, tau)
    z = complex(z)
    q = model.Q(z)
    if not math.isfinite(q):
        return 0.0 + 0.0j
    w = complex(td.phi_tau(z))
    dw = complex(td.dphi_tau(z))
    qt = complex(td.q_tau(z))
    h = complex(td.h_tau(z))
    amp = (n / (2 * math.pi)) ** 0.25
    arg = j * cmath.log(w) + 0.5 * (n * (qt - q) + h)
    return amp * cmath.sqrt(dw) * cmath.exp(arg)


def predicted_log_norm(model: PotentialModel, n: int, j: int) -> float:
    """Predicted log ||z^j||^2: droplet Gamma term plus the outpost band term."""
    if not model.is_radial():
        raise OutOfRegime("norm predictions are available for rotation-invariant models")
    droplet = math.lgamma(j + 1) - (j + 1) * math.log(n)
    if not model.has_outpost:
        return droplet
    band = (
        0.5 * math.log(2 * math.pi / n)
        - n
        + (2 * (j - n) + 1) * math.log(model.r2)
        - 0.5 * math.log(model.t0)
    )
    return float(np.logaddexp(droplet, band))


def predicted_mode_odds(model: PotentialModel, n: int, j: int) -> float:
    """Predicted odds that mode j lives on the outpost band."""
    if not model.has_outpost:
        return 0.0
    droplet = math.lgamma(j + 1) - (j + 1) * math.log(n)
    band = (
        0.5 * math.log(2 * math.pi / n)
        - n
        + (2 * (j - n) + 1) * math.log(model.r2)
        - 0.5 * math.log(model.t0)
    )
    return math.exp(band - droplet)


def approx_mode_edge(model: PotentialModel, n: int, j: int, z) -> complex:
    """Edge-window approximant built from the predicted norm; exact power law."""
    if not model.is_radial():
        raise OutOfRegime("edge approximants are available for rotation-invariant models")
    if not 1 <= j < n:
        raise OutOfRegime(f"mode index {j} outside 1..{n - 1}")
    z = complex(z)
    q = model.radial_Q(abs(z))
    if not math.isfinite(q) or z == 0:
        return 0.0 + 0.0j
    ln_c = predicted_log_norm(model, n, j)
    return cmath.exp(j * cmath.log(z) - 0.5 * (ln_c + n * q))
