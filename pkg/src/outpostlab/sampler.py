"""Exact and approximate samplers for the determinantal ensemble.

Three routes: per-mode radius draws (the rotation-invariant factorization of
the modulus law), sequential conditional sampling of the full determinantal
point process, and a Metropolis chain on the joint density as an independent
cross-check.  Randomness is counter-based: stream (seed, index) is an
independent Philox generator, so sample index i is reproducible in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EnvelopeViolation, MaxRejections, OutOfRegime
from .potential import PotentialModel

_ENVELOPE_SLACK = 1e-9


def rng_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for (seed, index); indices never collide."""
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), index]))


# -- per-mode radius tables ------------------------------------------------------------


@dataclass(frozen=True)
class ModeRadiusTable:
    """Inverse-CDF tables of the per-mode radius densities r^(2j+1) exp(-n Q)."""

    model: PotentialModel
    n: int
    grid: np.ndarray  # radii, concatenated over support cells
    cdfs: np.ndarray  # (n, grid) cumulative distributions

    @classmethod
    def build(cls, model: PotentialModel, n: int, points_per_cell: int = 1024):
        if not model.is_radial():
            raise OutOfRegime("mode radius tables need a rotation-invariant model")
        parts, dparts = [], []
        for a, b in model.radial_support_cells():
            g = np.linspace(a, b, points_per_cell)
            parts.append(g)
            # zero step at each cell start so no mass bridges a support hole
            dparts.append(np.diff(g, prepend=g[0]))
        rs = np.concatenate(parts)
        dr = np.concatenate(dparts)
        q = model.radial_Q_np(rs)
        with np.errstate(divide="ignore"):
            lr = np.log(np.where(rs > 0, rs, 1e-300))
        js = np.arange(n)[:, None]
        logw = (2 * js + 1) * lr[None, :] - n * q[None, :]
        logw -= logw.max(axis=1, keepdims=True)
        mass = np.exp(logw) * dr[None, :]
        cdfs = np.cumsum(mass, axis=1)
        cdfs /= cdfs[:, -1:]
        return cls(model=model, n=n, grid=rs, cdfs=cdfs)

    def draw(self, j: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        u = rng.random(size)
        cdf = self.cdfs[j]
        idx = np.clip(np.searchsorted(cdf, u), 1, len(self.grid) - 1)
        lo = cdf[idx - 1]
        frac = np.where(cdf[idx] > lo, (u - lo) / (cdf[idx] - lo), 0.5)
        r_lo = self.grid[idx - 1]
        r_hi = self.grid[idx]
        return r_lo + np.clip(frac, 0.0, 1.0) * (r_hi - r_lo)


def sample_moduli(
    model: PotentialModel, n: int, seed: int, num_samples: int,
    table: ModeRadiusTable | None = None,
) -> np.ndarray:
    """Joint modulus law of the ensemble: independent per-mode radii, (m, n)."""
    table = table or ModeRadiusTable.build(model, n)
    out = np.empty((num_samples, n))
    for i in range(num_samples):
        rng = rng_stream(seed, i)
        for j in range(n):
            out[i, j] = table.draw(j, rng)
    return out


def sample_counts(occupancies: np.ndarray, seed: int, num_samples: int) -> np.ndarray:
    """Outpost-side counts: independent Bernoulli draws with the exact mode masses."""
    p = np.asarray(occupancies, dtype=float)
    out = np.empty(num_samples, dtype=np.int64)
    for i in range(num_samples):
        rng = rng_stream(seed, i)
        out[i] = int((rng.random(len(p)) < p).sum())
    return out


def count_moments(occupancies: np.ndarray) -> tuple[float, float]:
    """Exact mean and variance of the outpost count (sum of Bernoullis)."""
    p = np.asarray(occupancies, dtype=float)
    return float(p.sum()), float((p * (1 - p)).sum())


# -- sequential determinantal sampler ----------------------------------------------------


def _feature_vector(spectral, z: complex) -> np.ndarray:
    """Weighted orthonormal mode values (e_0(z), ..., e_{n-1}(z))."""
    model = spectral.model
    if model.is_radial():
        q = model.radial_Q(abs(z))
        if not math.isfinite(q):
            return np.zeros(spectral.n, dtype=complex)
        if z == 0:
            v = np.zeros(spectral.n, dtype=complex)
            v[0] = math.exp(-0.5 * (spectral.log_norms[0] + spectral.n * q))
            return v
        lz = np.log(complex(z))
        js = np.arange(spectral.n)
        return np.exp(js * lz - 0.5 * spectral.log_norms - 0.5 * spectral.n * q)
    return np.array([spectral.mode_value(j, z) for j in range(spectral.n)])


def sample_dpp(
    spectral, seed: int, sample_index: int = 0, max_rejections: int = 200_000,
    table: ModeRadiusTable | None = None,
) -> np.ndarray:
    """One exact draw of the n-point determinantal process, as complex positions.

    Sequential conditioning: point k+1 is drawn from the residual kernel
    K_k(z, z) / (n - k) by rejection from the mode mixture K_0(z, z) / n,
    which dominates every residual (acceptance ratio is at most 1).
    """
    model = spectral.model
    n = spectral.n
    table = table or ModeRadiusTable.build(model, n)
    rng = rng_stream(seed, sample_index)
    points = np.empty(n, dtype=complex)
    basis: list[np.ndarray] = []
    rejections = 0
    for k in range(n):
        while True:
            j = int(rng.integers(n))
            r = float(table.draw(j, rng))
            z = r * complex(np.exp(2j * math.pi * rng.random()))
            v = _feature_vector(spectral, z)
            k0 = float(np.vdot(v, v).real)
            if k0 <= 0:
                rejections += 1
            else:
                proj = sum(abs(np.vdot(g, v)) ** 2 for g in basis)
                ratio = (k0 - proj) / k0
                if ratio > 1.0 + _ENVELOPE_SLACK:
                    raise EnvelopeViolation(
                        f"residual kernel exceeded its envelope by {ratio - 1:.3e}"
                    )
                if rng.random() < max(0.0, ratio):
                    break
                rejections += 1
            if rejections > max_rejections:
                raise MaxRejections(
                    f"exceeded {max_rejections} proposals at point {k} of {n}"
                )
        points[k] = z
        for g in basis:
            v = v - np.vdot(g, v) * g
        nrm = math.sqrt(float(np.vdot(v, v).real))
        basis.append(v / nrm)
    return points


def sample_dpp_many(spectral, seed: int, num_samples: int) -> np.ndarray:
    """(num_samples, n) positions; sample i uses stream (seed, i)."""
    table = ModeRadiusTable.build(spectral.model, spectral.n)
    return np.array(
        [
            sample_dpp(spectral, seed, sample_index=i, table=table)
            for i in range(num_samples)
        ]
    )


# -- Metropolis cross-check ---------------------------------------------------------------


def sample_mcmc(
    model: PotentialModel,
    n: int,
    seed: int,
    num_samples: int,
    burn_sweeps: int = 3000,
    thin_sweeps: int = 30,
    target_accept: float = 0.23,
) -> np.ndarray:
    """Metropolis samples of the joint density, (num_samples, n) positions.

    Single-site Gaussian moves; the step size adapts toward the target
    acceptance rate during burn-in and is frozen afterwards.
    """
    rng = rng_stream(seed, 0)
    # start from independent per-mode draws so the chain opens near equilibrium
    if model.is_radial():
        table = ModeRadiusTable.build(model, n)
        radii = np.array([float(table.draw(j, rng)) for j in range(n)])
        angles = 2 * np.pi * rng.random(n)
        z = radii * np.exp(1j * angles)
    else:
        pts = model.curve_points(1, n)
        z = pts * (0.5 + 0.5 * rng.random(n))

    def qval(zz: complex) -> float:
        return model.radial_Q(abs(zz)) if model.is_radial() else model.Q(zz)

    logq = np.array([qval(zz) for zz in z])
    step = 1.0 / math.sqrt(n)
    accepted = 0
    proposed = 0
    out = np.empty((num_samples, n), dtype=complex)
    collected = 0
    sweep = 0
    total_sweeps = burn_sweeps + num_samples * thin_sweeps
    while collected < num_samples:
        for i in range(n):
            zi = z[i] + step * (rng.normal() + 1j * rng.normal())
            qi = qval(zi)
            proposed += 1
            if not math.isfinite(qi):
                continue
            d = z - z[i]
            dnew = z - zi
            d[i] = dnew[i] = 1.0
            with np.errstate(divide="ignore"):
                gain = 2.0 * (np.log(np.abs(dnew)) - np.log(np.abs(d))).sum()
            delta = gain - n * (qi - logq[i])
            if delta >= 0 or rng.random() < math.exp(delta):
                z[i] = zi
                logq[i] = qi
                accepted += 1
        sweep += 1
        if sweep <= burn_sweeps:
            if sweep % 50 == 0:
                rate = accepted / max(1, proposed)
                step *= math.exp(0.5 * (rate - target_accept))
                accepted = proposed = 0
        elif (sweep - burn_sweeps) % thin_sweeps == 0:
            out[collected] = z
            collected += 1
        if sweep > total_sweeps + thin_sweeps:
            break
    return out


# -- window statistics -----------------------------------------------------------------


def outpost_count(model: PotentialModel, points: np.ndarray) -> int:
    """Number of points on the outpost side of the gap."""
    return int(sum(model.region_label(complex(z)) == 2 for z in np.ravel(points)))


def belt_count(model: PotentialModel, points: np.ndarray, n: int, mfac: float = 3.0) -> int:
    """Points within M sqrt(log n / n) of the outpost curve, on the outpost side."""
    if not model.has_outpost:
        return 0
    delta = mfac * math.sqrt(math.log(n) / n)
    cnt = 0
    for z in np.ravel(points):
        z = complex(z)
        if model.region_label(z) != 2:
            continue
        a = abs(model.frame.phi1(z))
        if abs(a - model.geom.rho2) * model.cap <= delta:
            cnt += 1
    return cnt
