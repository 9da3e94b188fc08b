"""Confining potentials with a spectral outpost.

A model bundles the analytic potential Q_1 near the droplet, the obstacle
function, an outpost bump carried by a Jordan curve C_2 in the exterior, and
the conformal/harmonic data entering boundary kernels.  dA = d^2z / pi and
the Laplacian convention is del dbar (so Laplacian of |z|^2 is 1).

Families: ginibre (control, no outpost), radial, quadrature_domain (rational
exterior map with one node), elliptic_ginibre.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import mpmath as mp
import numpy as np

from .errors import InvalidGeometry, NoAdmissibleRoot, ResolutionExceeded, Supercritical

MODEL_KINDS = ("ginibre", "radial", "quadrature_domain", "elliptic_ginibre")


class GapFill(str, Enum):
    INFINITE = "infinite"
    SMOOTH = "smooth"


def _is_mp(z) -> bool:
    return isinstance(z, (mp.mpf, mp.mpc))


def _csqrt(z):
    return mp.sqrt(z) if _is_mp(z) else cmath.sqrt(z)


def _clog(z):
    return mp.log(z) if _is_mp(z) else cmath.log(z)


def _rlog(x):
    return mp.log(x) if _is_mp(x) else math.log(x)


def _quadratic_exterior_root(b, c):
    """Root of w^2 + b w + c = 0 with the larger modulus, evaluated stably."""
    s = _csqrt(b * b - 4 * c)
    if (b.real * s.real + b.imag * s.imag) < 0:
        s = -s
    w1 = -(b + s) / 2
    if abs(w1) == 0:
        return -b
    w2 = c / w1
    return w1 if abs(w1) >= abs(w2) else w2


class ConformalFrame:
    """Exterior Riemann map psi of the droplet complement and its inverse."""

    cap: float

    def psi(self, w):
        raise NotImplementedError

    def dpsi(self, w):
        raise NotImplementedError

    def phi1(self, z):
        raise NotImplementedError

    def dphi1(self, z):
        return 1 / self.dpsi(self.phi1(z))

    def boundary(self, rho: float, m: int) -> np.ndarray:
        th = 2 * np.pi * np.arange(m) / m
        return np.array([complex(self.psi(rho * complex(np.cos(t), np.sin(t)))) for t in th])


@dataclass(frozen=True)
class ScaledIdentityFrame(ConformalFrame):
    cap: float

    def psi(self, w):
        return self.cap * w

    def dpsi(self, w):
        return self.cap * (w * 0 + 1) if _is_mp(w) else self.cap

    def phi1(self, z):
        return z / self.cap

    def boundary(self, rho, m):
        th = 2 * np.pi * np.arange(m) / m
        return self.cap * rho * np.exp(1j * th)


@dataclass(frozen=True)
class JoukowskiFrame(ConformalFrame):
    """psi(w) = rho (w + k/w); univalent on |w| >= 1 for |k| < 1."""

    rho: float
    k: float

    @property
    def cap(self) -> float:
        return self.rho

    def psi(self, w):
        return self.rho * (w + self.k / w)

    def dpsi(self, w):
        return self.rho * (1 - self.k / (w * w))

    def phi1(self, z):
        # rho w^2 - z w + rho k = 0
        return _quadratic_exterior_root(-z / self.rho, self.k + 0 * z)


@dataclass(frozen=True)
class RationalNodeFrame(ConformalFrame):
    """psi(w) = r1 w (w - w0 + b)/(w - p), p = 1/w0; node at psi(w0)."""

    r1: float
    w0: float
    b: float

    @property
    def p(self) -> float:
        return 1.0 / self.w0

    @property
    def cap(self) -> float:
        return self.r1

    def psi(self, w):
        return self.r1 * w * (w - self.w0 + self.b) / (w - self.p)

    def dpsi(self, w):
        num = w * w - 2 * self.p * w - self.p * (self.b - self.w0)
        return self.r1 * num / (w - self.p) ** 2

    def dpsi_zeros(self):
        p, d = self.p, self.b - self.w0
        s = cmath.sqrt(p * p + p * d)
        return p + s, p - s

    def phi1(self, z):
        # r1 w^2 + (r1 (b - w0) - z) w + z p = 0
        return _quadratic_exterior_root(
            (self.r1 * (self.b - self.w0) - z) / self.r1, z * self.p / self.r1
        )


@dataclass(frozen=True)
class RegionGeometry:
    """Collar widths and cutoffs, all in |phi_1| scale."""

    rho2: float
    w_in: float
    w_out: float

    @property
    def gap_lo(self) -> float:
        return 1.0 + self.w_in

    @property
    def gap_hi(self) -> float:
        return self.rho2 * (1.0 - self.w_in)

    @property
    def cap_out(self) -> float:
        return self.rho2 * (1.0 + self.w_out)

    @property
    def mid(self) -> float:
        return 0.5 * (self.gap_lo + self.gap_hi)


def collar_widths(rho2: float) -> tuple[float, float]:
    w_in = min(0.2, (rho2 - 1.0) / 3.0)
    return w_in, min(0.2, 3.0 * w_in)


@dataclass(frozen=True)
class HarmonicData:
    """H = Re h1 + c * log|phi_1| / log rho2 with h1 analytic in 1/phi_1."""

    coeffs: tuple  # complex Laurent coefficients a_0, a_1, ... of h1
    c: float
    residual: float = 0.0

    def h1(self, frame: ConformalFrame, z):
        w = frame.phi1(z)
        acc = self.coeffs[0] + 0 * w
        pw = 1 + 0 * w
        for a in self.coeffs[1:]:
            pw = pw / w
            acc = acc + a * pw
        return acc


@dataclass(frozen=True)
class PotentialModel:
    kind: str
    r1: float
    r2: float | None
    t0: float | None
    alpha: float = 0.0
    gap_fill: GapFill = GapFill.INFINITE
    frame: ConformalFrame = field(compare=False, default=None)
    geom: RegionGeometry = field(compare=False, default=None)
    harmonic: HarmonicData = field(compare=False, default=None)
    t: float = 1.0  # Laplacian of Q_1 on the droplet
    area: float = 1.0  # normalized droplet area
    q1_coeffs: tuple = field(compare=False, repr=False, default=())
    recorded_c: float | None = field(compare=False, default=None)
    recorded_h1: float | None = field(compare=False, default=None)
    split_radius: float | None = field(compare=False, default=None)

    # -- scalar potential pieces (mp-friendly) --------------------------------

    @property
    def cap(self) -> float:
        return self.frame.cap

    @property
    def has_outpost(self) -> bool:
        return self.r2 is not None

    @property
    def c(self) -> float:
        return self.harmonic.c

    @property
    def h1_const(self) -> float:
        return float(self.harmonic.coeffs[0].real)

    def q1(self, z):
        if self.kind in ("ginibre", "radial"):
            return 1.0 + 0 * z
        if self.kind == "elliptic_ginibre":
            w = self.frame.phi1(z)
            return 1.0 - self.alpha / (w * w)
        # quadrature_domain: Laurent series in 1/phi_1 of the completion with
        # Re q_1 = Q_1 on C_1; holomorphic in Ext C_1 and real at infinity
        w = self.frame.phi1(z)
        acc = self.q1_coeffs[0] + 0 * w
        pw = 1 + 0 * w
        for a in self.q1_coeffs[1:]:
            pw = pw / w
            acc = acc + a * pw
        return acc

    def q1_infinity(self) -> complex:
        if self.kind == "quadrature_domain":
            return complex(self.q1_coeffs[0])
        return 1.0 + 0j

    def q2(self, z):
        return self.q1(z) + 2 * _rlog(self.geom.rho2)

    def q2_infinity(self) -> complex:
        return self.q1_infinity() + 2 * math.log(self.geom.rho2)

    def Q1(self, z):
        """Analytic droplet potential, valid on and around the droplet."""
        a2 = (z * z.conjugate()).real
        if self.kind in ("ginibre", "radial"):
            return a2
        if self.kind == "elliptic_ginibre":
            return (a2 + self.alpha * (z * z).real) / self.r1
        return self.t * (a2 - 2 * self.alpha * _rlog(abs(z - 2)))

    def obstacle(self, z):
        w = self.frame.phi1(z)
        if abs(w) <= 1:
            return self.Q1(z)
        return 2 * _rlog(abs(w)) + self.q1(z).real

    def bump(self, z):
        w2 = self.frame.phi1(z) / self.geom.rho2
        dw2 = self.frame.dphi1(z) / self.geom.rho2
        g = (w2 * w2.conjugate()).real - 1
        return self.t0 * g * g / (2 * (w2 * w2.conjugate()).real * (dw2 * dw2.conjugate()).real)

    def Q(self, z):
        a = abs(self.frame.phi1(z))
        g = self.geom
        if self.kind == "ginibre":
            return self.Q1(z) if a <= g.cap_out else math.inf
        if a <= g.gap_lo:
            return self.Q1(z)
        if a < g.gap_hi:
            if self.gap_fill is GapFill.INFINITE:
                return math.inf
            ob = self.obstacle(z)
            return ob + min(self.Q1(z) - ob, self.bump(z))
        if a <= g.cap_out:
            return self.obstacle(z) + self.bump(z)
        return math.inf

    def region_label(self, z) -> int:
        """0 = outside the finite-potential region, 1 = droplet side, 2 = outpost side."""
        a = abs(self.frame.phi1(z))
        g = self.geom
        if self.kind == "ginibre":
            return 1 if a <= g.cap_out else 0
        if a > g.cap_out:
            return 0
        if a <= g.gap_lo:
            return 1
        if a >= g.gap_hi:
            return 2
        if self.gap_fill is GapFill.SMOOTH:
            ob = self.obstacle(z)
            return 1 if self.Q1(z) - ob <= self.bump(z) else 2
        return 1 if a < g.mid else 2

    def laplacian_curve(self, curve: int) -> float:
        if curve == 1:
            return self.t
        if curve == 2 and self.has_outpost:
            return self.t0
        raise ValueError(f"no curve {curve}")

    def curve_points(self, curve: int, m: int) -> np.ndarray:
        rho = 1.0 if curve == 1 else self.geom.rho2
        return self.frame.boundary(rho, m)

    def h1_at(self, z):
        return self.harmonic.h1(self.frame, z)

    # -- radial fast paths -----------------------------------------------------

    def is_radial(self) -> bool:
        return self.kind in ("ginibre", "radial")

    def radial_Q(self, r):
        """Profile Q(r) for rotation-invariant models (mp-friendly scalar)."""
        if self.kind == "ginibre":
            return r * r if r <= self.geom.cap_out else math.inf
        g = self.geom
        if r <= g.gap_lo:
            return r * r
        check = 2 * _rlog(r) + 1
        bump = self.t0 * (r * r - self.r2 * self.r2) ** 2 / (2 * r * r)
        if r < g.gap_hi:
            if self.gap_fill is GapFill.INFINITE:
                return math.inf
            return check + min(r * r - check, bump)
        if r <= g.cap_out:
            return check + bump
        return math.inf

    def radial_Q_np(self, r: np.ndarray) -> np.ndarray:
        """Vectorized float64 profile (inf outside the support)."""
        r = np.asarray(r, dtype=float)
        out = np.full_like(r, np.inf)
        if self.kind == "ginibre":
            m = r <= self.geom.cap_out
            out[m] = r[m] ** 2
            return out
        g = self.geom
        inner = r <= g.gap_lo
        out[inner] = r[inner] ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            check = 2 * np.log(r) + 1
            bump = self.t0 * (r**2 - self.r2**2) ** 2 / (2 * r**2)
        band = (r >= g.gap_hi) & (r <= g.cap_out)
        out[band] = check[band] + bump[band]
        if self.gap_fill is GapFill.SMOOTH:
            gap = (r > g.gap_lo) & (r < g.gap_hi)
            out[gap] = check[gap] + np.minimum(r[gap] ** 2 - check[gap], bump[gap])
        return out

    def radial_support_cells(self) -> list[tuple[float, float]]:
        """Maximal radii intervals on which the profile is finite and smooth."""
        if self.kind == "ginibre":
            c = self.geom.cap_out
            return [(0.0, 1.0), (1.0, min(2.0, c)), (min(2.0, c), c)]
        g = self.geom
        cells = [(0.0, 1.0), (1.0, g.gap_lo)]
        if self.gap_fill is GapFill.SMOOTH:
            rc = self.split_radius
            cells += [(g.gap_lo, rc), (rc, g.gap_hi)]
        cells += [(g.gap_hi, self.r2), (self.r2, g.cap_out)]
        return cells

    def delta_Q_numeric(self, z: complex, h: float = 1e-5) -> float:
        """del dbar Q by a 5-point stencil (diagnostics only)."""
        q0 = self.Q(z)
        s = self.Q(z + h) + self.Q(z - h) + self.Q(z + 1j * h) + self.Q(z - 1j * h)
        return (s - 4 * q0) / (4 * h * h)


# -- quadrature-domain machinery ------------------------------------------------


def _quartic_real_roots(alpha: float, r1: float) -> list[float]:
    roots = np.roots([r1 * r1, -2 * r1, -alpha, -2 * r1, 4.0])
    return sorted(
        (float(r.real) for r in roots if abs(r.imag) < 1e-9 * max(1.0, abs(r))),
        reverse=True,
    )


def _univalence_margin(frame: RationalNodeFrame) -> float:
    """Positive iff psi' has no zero on or outside the unit circle."""
    z1, z2 = frame.dpsi_zeros()
    return 1.0 - max(abs(z1), abs(z2))


def _boundary_injective(frame: RationalNodeFrame, m: int = 720) -> bool:
    pts = frame.boundary(1.0, m)
    diam = float(np.ptp(pts.real) + np.ptp(pts.imag))
    d = np.abs(pts[:, None] - pts[None, :])
    idx = np.abs(np.subtract.outer(np.arange(m), np.arange(m)))
    idx = np.minimum(idx, m - idx)
    mask = idx >= 2
    return float(d[mask].min()) > 1e-9 * diam


def solve_w0(alpha: float, r1: float) -> RationalNodeFrame:
    """Admissible exterior-map data for the quadrature-domain family.

    Raises Supercritical when real roots exist but none gives a univalent
    map (boundary cusp), NoAdmissibleRoot when no usable real root exists.
    """
    if not (-1.0 < alpha <= 0.0):
        raise NoAdmissibleRoot(f"alpha={alpha} outside (-1, 0]")
    if r1 <= 0:
        raise InvalidGeometry(f"r1={r1} must be positive")
    candidates = [w for w in _quartic_real_roots(alpha, r1) if abs(w) > 1.0]
    if not candidates:
        raise Supercritical(
            f"no real quartic root with |w0| > 1 at alpha={alpha}, r1={r1}; "
            "capacity exceeds the critical value"
        )
    rejected = []
    for w0 in candidates:
        b = (2.0 / r1) * (w0 * w0 - 1.0) / (w0 * w0)
        frame = RationalNodeFrame(r1=r1, w0=w0, b=b)
        margin = _univalence_margin(frame)
        if margin > 1e-12 and _boundary_injective(frame):
            return frame
        rejected.append((w0, margin))
    worst = max(m for _, m in rejected)
    raise Supercritical(
        f"all quartic roots fail univalence at alpha={alpha}, r1={r1} "
        f"(best margin {worst:.3e}); capacity exceeds the critical value"
    )


def critical_r1(alpha: float, lo: float = 1e-3, hi: float = 4.0, tol: float = 1e-6) -> float:
    """Largest admissible capacity for the quadrature-domain family at alpha."""

    def ok(r1: float) -> bool:
        try:
            solve_w0(alpha, r1)
            return True
        except (Supercritical, NoAdmissibleRoot):
            return False

    if not ok(lo):
        raise NoAdmissibleRoot(f"no admissible capacity found near r1={lo}")
    while ok(hi):
        hi *= 2
        if hi > 64:
            return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def droplet_area(frame: ConformalFrame, m: int = 4096) -> float:
    """Normalized droplet area (1/pi) * (1/2) Im contour(z_bar dz)."""
    th = 2 * np.pi * np.arange(m) / m
    w = np.exp(1j * th)
    z = np.array([complex(frame.psi(ww)) for ww in w])
    dz = np.array([complex(frame.dpsi(ww)) for ww in w]) * 1j * w
    return float(np.imag(np.sum(np.conj(z) * dz)) / m)


def schwarz_residue(frame: RationalNodeFrame) -> float:
    """Residue of the Schwarz function at the node psi(w0)."""
    w0, b, r1 = frame.w0, frame.b, frame.r1
    return float((r1 * ((w0 - b) * w0 - 1) * frame.dpsi(w0)).real)


def _completion_coeffs(
    frame: ConformalFrame, t: float, alpha: float, m: int = 4096, tol: float = 1e-15
) -> tuple:
    """Laurent coefficients (powers of 1/phi_1) of the analytic completion
    with Re q_1 = Q_1 on the image of the unit circle and q_1 real at infinity.

    The reflected boundary data continues to an annulus, so the coefficients
    decay geometrically; a shifted-grid residual guards against truncation.
    """

    def boundary_data(angles: np.ndarray) -> np.ndarray:
        z = np.array([complex(frame.psi(u)) for u in np.exp(1j * angles)])
        return t * (np.abs(z) ** 2 - 2 * alpha * np.log(np.abs(z - 2.0)))

    th = 2 * np.pi * np.arange(m) / m
    hat = np.fft.rfft(boundary_data(th)) / m
    qk = 2.0 * np.conj(hat[1:-1])
    keep = np.nonzero(np.abs(qk) > tol * max(1.0, abs(hat[0])))[0]
    coeffs = (complex(hat[0].real),) + tuple(
        complex(v) for v in qk[: int(keep[-1]) + 1 if keep.size else 0]
    )
    ths = th + np.pi / m
    w = np.exp(1j * ths)
    acc = np.full(m, coeffs[0])
    pw = np.ones(m, dtype=complex)
    for a in coeffs[1:]:
        pw = pw / w
        acc = acc + a * pw
    residual = float(np.max(np.abs(acc.real - boundary_data(ths))))
    if residual > 1e-9:
        raise ResolutionExceeded(f"completion residual {residual:.3e} on the droplet boundary")
    return coeffs


# -- builders --------------------------------------------------------------------


def _smooth_crossover(geom: RegionGeometry, r2: float, t0: float) -> float:
    """Radius in (gap_lo, gap_hi) where the droplet excess meets the bump (radial)."""
    from scipy.optimize import brentq

    def f(r):
        bump = t0 * (r * r - r2 * r2) ** 2 / (2 * r * r)
        return (r * r - 2 * math.log(r) - 1) - bump

    lo, hi = geom.gap_lo, geom.gap_hi
    if f(lo) >= 0 or f(hi) <= 0:
        raise InvalidGeometry(
            "smooth gap fill requires the excess crossover inside the gap "
            f"(r2={r2}, t0={t0})"
        )
    return float(brentq(f, lo, hi, xtol=1e-14))


def _check_outpost_band(model: PotentialModel) -> None:
    g = model.geom
    if g.gap_hi <= g.gap_lo:
        raise InvalidGeometry(
            f"collars overlap: rho2={g.rho2} leaves no gap (need rho2 > 1 + 3w)"
        )
    # bump Laplacian must stay positive across the outpost band
    for s in np.linspace(g.gap_hi, g.cap_out, 7):
        for th in np.linspace(0, 2 * np.pi, 9, endpoint=False):
            z = complex(model.frame.psi(s * cmath.exp(1j * th)))
            if model.delta_Q_numeric(z) <= 0:
                raise InvalidGeometry(f"Laplacian of Q non-positive on the outpost band at {z}")


def build_ginibre_model() -> PotentialModel:
    frame = ScaledIdentityFrame(cap=1.0)
    geom = RegionGeometry(rho2=3.0, w_in=0.0, w_out=0.0)
    harm = HarmonicData(coeffs=(0j,), c=0.0)
    return PotentialModel(
        kind="ginibre", r1=1.0, r2=None, t0=None, frame=frame, geom=geom,
        harmonic=harm, t=1.0, area=1.0,
    )


def build_radial_model(
    r2: float, t0: float, gap_fill: GapFill | str = GapFill.INFINITE
) -> PotentialModel:
    gap_fill = GapFill(gap_fill)
    if r2 <= 1.0:
        raise InvalidGeometry(f"r2={r2} must exceed the droplet radius 1")
    if t0 is None or t0 <= 0:
        raise InvalidGeometry("t0 must be positive")
    w_in, w_out = collar_widths(r2)
    geom = RegionGeometry(rho2=r2, w_in=w_in, w_out=w_out)
    c = 0.5 * math.log(t0)
    harm = HarmonicData(coeffs=(0j,), c=c)
    split = geom.mid if gap_fill is GapFill.INFINITE else _smooth_crossover(geom, r2, t0)
    model = PotentialModel(
        kind="radial", r1=1.0, r2=r2, t0=t0, gap_fill=gap_fill,
        frame=ScaledIdentityFrame(cap=1.0), geom=geom, harmonic=harm,
        t=1.0, area=1.0, recorded_c=c, recorded_h1=0.0, split_radius=split,
    )
    _check_outpost_band(model)
    return model


def build_elliptic_ginibre_model(
    alpha: float, r1: float, r2: float, t0: float,
    gap_fill: GapFill | str = GapFill.INFINITE,
) -> PotentialModel:
    gap_fill = GapFill(gap_fill)
    alpha = float(alpha)
    if not (-1.0 < alpha < 1.0):
        raise InvalidGeometry(f"alpha={alpha} must lie in (-1, 1)")
    if r1 <= 0:
        raise InvalidGeometry("r1 must be positive")
    rho = math.sqrt(r1 / (1 - alpha * alpha))
    frame = JoukowskiFrame(rho=rho, k=-alpha)
    rho2 = r2 / rho
    if rho2 <= 1.0:
        raise InvalidGeometry(f"r2={r2} lies inside the droplet (capacity {rho:.6g})")
    w_in, w_out = collar_widths(rho2)
    geom = RegionGeometry(rho2=rho2, w_in=w_in, w_out=w_out)
    t = 1.0 / r1
    c = 0.5 * math.log(t0 / t)
    h1 = 0.5 * math.log(t)
    harm = HarmonicData(coeffs=(complex(h1),), c=c)
    model = PotentialModel(
        kind="elliptic_ginibre", r1=r1, r2=r2, t0=t0, alpha=alpha, gap_fill=gap_fill,
        frame=frame, geom=geom, harmonic=harm, t=t, area=r1,
        recorded_c=c, recorded_h1=h1, split_radius=geom.mid,
    )
    _check_outpost_band(model)
    return model


def build_quadrature_domain_model(
    alpha: float, r1: float, r2: float, t0: float,
    gap_fill: GapFill | str = GapFill.INFINITE,
) -> PotentialModel:
    gap_fill = GapFill(gap_fill)
    frame = solve_w0(alpha, r1)
    area = droplet_area(frame)
    t = 1.0 / area
    rho2 = r2 / r1
    if rho2 <= 1.0:
        raise InvalidGeometry(f"r2={r2} must exceed the capacity r1={r1}")
    w_in, w_out = collar_widths(rho2)
    geom = RegionGeometry(rho2=rho2, w_in=w_in, w_out=w_out)
    if abs(frame.w0) <= geom.cap_out:
        raise InvalidGeometry(
            f"node lies inside the finite-potential region (|w0|={abs(frame.w0):.4f} "
            f"<= cap {geom.cap_out:.4f}); reduce r2"
        )
    c = 0.5 * math.log(t0 / t)
    h1 = 0.5 * math.log(t)
    harm = HarmonicData(coeffs=(complex(h1),), c=c)
    model = PotentialModel(
        kind="quadrature_domain", r1=r1, r2=r2, t0=t0, alpha=alpha, gap_fill=gap_fill,
        frame=frame, geom=geom, harmonic=harm, t=t, area=area,
        q1_coeffs=_completion_coeffs(frame, t, alpha),
        recorded_c=0.5 * math.log(t0 / r1), recorded_h1=-0.5 * math.log(r1),
        split_radius=geom.mid,
    )
    _check_outpost_band(model)
    return model


# -- harmonic solver ---------------------------------------------------------------


def harmonic_solve(
    frame: ConformalFrame, rho2: float, data1, data2,
    order: int = 64, tol: float = 1e-10, max_order: int = 512,
) -> HarmonicData:
    """Solve Re h1 + c * log|phi_1|/log rho2 = data on the two image circles.

    data1/data2 are callables of the phi_1 angle.  Least squares on 4*order
    points per curve; the Laurent order doubles until the residual meets tol.
    """
    while True:
        m = 4 * order
        th = 2 * np.pi * np.arange(m) / m
        cols = [np.ones(2 * m)]
        for k in range(1, order + 1):
            ck, sk = np.cos(k * th), np.sin(k * th)
            cols.append(np.concatenate([ck, ck * rho2 ** (-k)]))
            cols.append(np.concatenate([sk, sk * rho2 ** (-k)]))
        cols.append(np.concatenate([np.zeros(m), np.ones(m)]))
        A = np.column_stack(cols)
        b = np.concatenate([[data1(t) for t in th], [data2(t) for t in th]])
        sol, *_ = np.linalg.lstsq(A, b, rcond=None)
        residual = float(np.max(np.abs(A @ sol - b)))
        if residual <= tol:
            coeffs = [complex(sol[0])]
            for k in range(order):
                coeffs.append(complex(sol[1 + 2 * k], sol[2 + 2 * k]))
            while len(coeffs) > 1 and abs(coeffs[-1]) < 1e-15:
                coeffs.pop()
            return HarmonicData(coeffs=tuple(coeffs), c=float(sol[-1]), residual=residual)
        if order >= max_order:
            raise ResolutionExceeded(
                f"harmonic solver residual {residual:.3e} > {tol} at order {max_order}"
            )
        order *= 2


# -- tau family --------------------------------------------------------------------


@dataclass(frozen=True)
class TauData:
    """Droplet family data for the mass-tau equilibrium problem of Q."""

    tau: float
    frame: ConformalFrame = field(compare=False)
    model: PotentialModel = field(compare=False)
    q_coeffs: tuple = field(compare=False, repr=False, default=())

    def q_tau(self, z):
        m = self.model
        if m.is_radial():
            return self.tau + 0 * z
        if m.kind == "elliptic_ginibre":
            w = self.frame.phi1(z)
            return self.tau * (1.0 - m.alpha / (w * w))
        # member completion: Re q_tau = Q_1 on the member boundary, real at infinity
        w = self.frame.phi1(z)
        acc = self.q_coeffs[0] + 0 * w
        pw = 1 + 0 * w
        for a in self.q_coeffs[1:]:
            pw = pw / w
            acc = acc + a * pw
        return acc

    def h_tau(self, z):
        return self.model.h1_const + 0 * z

    def phi_tau(self, z):
        return self.frame.phi1(z)

    def dphi_tau(self, z):
        return self.frame.dphi1(z)

    def obstacle_tau(self, z):
        if abs(self.frame.phi1(z)) <= 1:
            return self.model.Q1(z)
        return 2 * self.tau * _rlog(abs(self.frame.phi1(z))) + self.q_tau(z).real


def tau_family(model: PotentialModel, tau: float) -> TauData:
    """Equilibrium data at partial mass tau in (0, 1]."""
    if not 0 < tau <= 1:
        raise InvalidGeometry(f"tau={tau} outside (0, 1]")
    if model.is_radial():
        return TauData(tau=tau, frame=ScaledIdentityFrame(cap=math.sqrt(tau)), model=model)
    if model.kind == "elliptic_ginibre":
        rho_t = math.sqrt(tau * model.r1 / (1 - model.alpha**2))
        return TauData(tau=tau, frame=JoukowskiFrame(rho=rho_t, k=-model.alpha), model=model)
    # quadrature domain: member capacity solved so the member area is tau * area
    from scipy.optimize import brentq

    target = tau * model.area
    if abs(tau - 1.0) < 1e-14:
        return TauData(tau=tau, frame=model.frame, model=model, q_coeffs=model.q1_coeffs)

    def f(r):
        return droplet_area(solve_w0(model.alpha, r), m=1024) - target

    frame_t = solve_w0(model.alpha, brentq(f, 1e-4, model.r1, xtol=1e-12))
    return TauData(
        tau=tau, frame=frame_t, model=model,
        q_coeffs=_completion_coeffs(frame_t, model.t, model.alpha),
    )


# -- model files -------------------------------------------------------------------

_MODEL_KEYS = ("kind", "alpha_re", "alpha_im", "r1", "r2", "t0", "gap_fill")


def parse_model_file(path) -> dict:
    """key=value model description; '#' comments; unknown keys rejected."""
    cfg: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in _MODEL_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in cfg:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            cfg[key] = val
    if "kind" not in cfg:
        raise ValueError(f"{path}: missing required key 'kind'")
    return cfg


def build_model_from_config(cfg: dict) -> PotentialModel:
    kind = cfg["kind"].strip()
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")

    def num(key, default=None):
        if key not in cfg:
            if default is None:
                raise ValueError(f"model kind {kind!r} requires key {key!r}")
            return default
        return float(cfg[key])

    if float(cfg.get("alpha_im", 0.0) or 0.0) != 0.0:
        raise ValueError("alpha_im must be 0 (rotated families are not supported)")
    gap_fill = GapFill(cfg.get("gap_fill", GapFill.INFINITE))
    if kind == "ginibre":
        return build_ginibre_model()
    if kind == "radial":
        r1 = num("r1", 1.0)
        if r1 != 1.0:
            raise ValueError("radial models have unit capacity; r1 must be 1")
        return build_radial_model(num("r2"), num("t0"), gap_fill)
    if kind == "elliptic_ginibre":
        return build_elliptic_ginibre_model(
            num("alpha_re", 0.0), num("r1"), num("r2"), num("t0"), gap_fill
        )
    return build_quadrature_domain_model(
        num("alpha_re", 0.0), num("r1"), num("r2"), num("t0"), gap_fill
    )


def load_model(path) -> PotentialModel:
    return build_model_from_config(parse_model_file(path))
