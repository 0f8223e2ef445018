"""Spectra, densities of states, spectral flows and local densities.

Exact diagonalization (dense) for desk-scale operators, a kernel
polynomial method (Chebyshev moments with Jackson damping, stochastic
trace over seeded random states) for large sparse ones.  All stochastic
steps take an explicit seed so outputs are reproducible bit for bit.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, ResourceLimitError

__all__ = [
    "SpectrumResult",
    "DOSCurve",
    "Gap",
    "DENSE_CAP",
    "exact_spectrum",
    "idos",
    "idos_curve",
    "idos_mse",
    "cumulative_curve",
    "spectral_bounds",
    "kpm_dos",
    "detect_gaps",
    "simplex_path",
    "spectral_flow",
    "ldos",
    "eigenpairs_near",
    "write_curve_csv",
    "write_spectrum_csv",
]

DENSE_CAP = 6000
DEFAULT_GRID_POINTS = 1024
KPM_MOMENTS = 500
KPM_RANDOM_STATES = 10
POWER_ITERATIONS = 50
BOUND_PAD = 0.01


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


@dataclass
class DOSCurve:
    energies: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Gap:
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, energy: float) -> bool:
        return self.lower < energy < self.upper


def _dense(mat) -> np.ndarray:
    if sp.issparse(mat):
        return mat.toarray()
    return np.asarray(mat)


def exact_spectrum(mat, want_vectors: bool = False, dense_cap: int = DENSE_CAP) -> SpectrumResult:
    """Full spectrum by dense Hermitian diagonalization.

    Refuses dimensions beyond dense_cap; use kpm_dos or eigenpairs_near
    for larger operators.
    """
    n = mat.shape[0]
    if n > dense_cap:
        raise ResourceLimitError(
            f"dimension {n} exceeds the dense diagonalization cap {dense_cap}; "
            f"use kpm_dos or eigenpairs_near, or raise dense_cap"
        )
    dense = _dense(mat)
    if want_vectors:
        vals, vecs = sla.eigh(dense)
        return SpectrumResult(vals, vecs)
    return SpectrumResult(sla.eigvalsh(dense))


def idos(spec: SpectrumResult, energy: float) -> float:
    """Fraction of states at or below the given energy."""
    return float(np.searchsorted(spec.eigenvalues, energy, side="right")) / spec.dim


def idos_curve(spec: SpectrumResult, grid: np.ndarray, metadata: dict | None = None) -> DOSCurve:
    vals = np.searchsorted(spec.eigenvalues, grid, side="right") / spec.dim
    return DOSCurve(np.asarray(grid, dtype=float), vals.astype(float), metadata or {})


def idos_mse(a: DOSCurve, b: DOSCurve) -> float:
    if a.energies.shape != b.energies.shape or not np.allclose(a.energies, b.energies):
        raise ConfigError("IDOS curves must share the same energy grid")
    return float(np.mean((a.values - b.values) ** 2))


def cumulative_curve(density: DOSCurve) -> DOSCurve:
    """Integrated density from a density curve, by trapezoid cumsum."""
    e, v = density.energies, density.values
    steps = np.diff(e) * (v[1:] + v[:-1]) / 2.0
    cum = np.concatenate([[0.0], np.cumsum(steps)])
    meta = dict(density.metadata)
    meta["kind"] = "idos"
    return DOSCurve(e, cum, meta)


def _power_extreme(matvec, n: int, rng, iterations: int) -> float:
    """Rayleigh quotient after power iterations; largest-|eigenvalue| estimate."""
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(iterations):
        w = matvec(v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
    return float(np.real(np.vdot(v, matvec(v))))


def spectral_bounds(
    mat, iterations: int = POWER_ITERATIONS, pad: float = BOUND_PAD, seed: int = 0
) -> tuple[float, float]:
    """Deterministic spectral interval estimate for a Hermitian operator.

    Edges come from seeded Lanczos runs (one per edge); plain power
    iteration stalls on these operators because their spectra are dense
    at the edges, which would leave eigenvalues outside the Chebyshev
    window.  The interval is inflated by the pad fraction on each side.
    """
    n = mat.shape[0]
    rng = np.random.default_rng(seed)
    if n <= 64:
        vals = np.linalg.eigvalsh(_dense(mat))
        lo, hi = float(vals[0]), float(vals[-1])
    else:
        v0 = rng.standard_normal(n)
        op = mat.tocsr() if sp.issparse(mat) else np.asarray(mat)
        try:
            hi = float(spla.eigsh(op, k=1, which="LA", v0=v0,
                                  return_eigenvectors=False)[0])
            lo = float(spla.eigsh(op, k=1, which="SA", v0=v0,
                                  return_eigenvectors=False)[0])
        except spla.ArpackError:
            # fallback: shifted power iterations for each edge
            radius = abs(_power_extreme(lambda v: op @ v, n, rng, iterations))
            if radius == 0.0:
                radius = 1.0
            hi = _power_extreme(lambda v: op @ v + radius * v, n, rng, iterations) - radius
            lo = -(_power_extreme(lambda v: radius * v - op @ v, n, rng, iterations) - radius)
    if hi < lo:
        lo, hi = hi, lo
    span = max(hi - lo, 1e-12)
    return lo - pad * span, hi + pad * span


def _jackson_kernel(m: int) -> np.ndarray:
    k = np.arange(m)
    mp1 = m + 1
    return (
        (mp1 - k) * np.cos(np.pi * k / mp1) + np.sin(np.pi * k / mp1) / np.tan(np.pi / mp1)
    ) / mp1


def kpm_dos(
    mat,
    moments: int = KPM_MOMENTS,
    random_states: int = KPM_RANDOM_STATES,
    grid_points: int = DEFAULT_GRID_POINTS,
    seed: int = 0,
    bounds: tuple[float, float] | None = None,
) -> DOSCurve:
    """Kernel polynomial DOS estimate, normalized to unit integral.

    Chebyshev moments are averaged over unit-normalized complex Gaussian
    states; Jackson damping suppresses Gibbs oscillations.  The operator
    is rescaled into (-1, 1) using deterministic seeded edge estimates
    unless explicit bounds are passed.
    """
    if moments < 2:
        raise ConfigError(f"moments must be at least 2, got {moments}")
    if random_states < 1:
        raise ConfigError(f"random_states must be positive, got {random_states}")
    if grid_points < 2:
        raise ConfigError(f"grid_points must be at least 2, got {grid_points}")
    n = mat.shape[0]
    if bounds is None:
        bounds = spectral_bounds(mat, seed=seed)
    lo, hi = bounds
    a = (hi - lo) / 2.0
    b = (hi + lo) / 2.0
    if a <= 0:
        raise ConfigError(f"invalid spectral bounds {bounds}")
    mat_csr = mat.tocsr() if sp.issparse(mat) else np.asarray(mat)

    def scaled(v):
        return (mat_csr @ v - b * v) / a

    rng = np.random.default_rng(seed)
    mu = np.zeros(moments)
    for _ in range(random_states):
        phi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        phi /= np.linalg.norm(phi)
        t_prev = phi
        t_cur = scaled(phi)
        mu[0] += 1.0
        mu[1] += np.real(np.vdot(phi, t_cur))
        for m in range(2, moments):
            t_next = 2.0 * scaled(t_cur) - t_prev
            mu[m] += np.real(np.vdot(phi, t_next))
            t_prev, t_cur = t_cur, t_next
    mu /= random_states

    damped = mu * _jackson_kernel(moments)
    x = np.linspace(-1.0, 1.0, grid_points + 2)[1:-1]  # avoid the open endpoints
    cheb_coeffs = damped.copy()
    cheb_coeffs[1:] *= 2.0
    series = np.polynomial.chebyshev.chebval(x, cheb_coeffs)
    density = series / (np.pi * np.sqrt(1.0 - x**2))
    energies = a * x + b
    density = density / a
    # unit normalization on the grid
    norm = np.trapezoid(density, energies)
    if norm > 0:
        density = density / norm
    return DOSCurve(
        energies,
        density,
        {
            "kind": "dos",
            "method": "kpm",
            "moments": moments,
            "random_states": random_states,
            "seed": seed,
            "bounds": [lo, hi],
        },
    )


def detect_gaps(spec: SpectrumResult, min_width: float = 0.05) -> list[Gap]:
    """Maximal spectral gaps of at least min_width, strictly inside the hull."""
    e = np.sort(spec.eigenvalues)
    gaps = []
    diffs = np.diff(e)
    for i in np.nonzero(diffs >= min_width)[0]:
        gaps.append(Gap(float(e[i]), float(e[i + 1])))
    return gaps


def simplex_path(samples_per_edge: int = 40) -> list[tuple[float, float, float]]:
    """Closed piecewise-linear loop through the 2-simplex vertices.

    Returns 3 * samples_per_edge + 1 points; the last repeats the first.
    """
    if samples_per_edge < 1:
        raise ConfigError("samples_per_edge must be positive")
    verts = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]
    path = []
    for e in range(3):
        start = np.array(verts[e])
        end = np.array(verts[(e + 1) % 3])
        for j in range(samples_per_edge):
            t = j / samples_per_edge
            pt = (1.0 - t) * start + t * end
            path.append(tuple(float(x) for x in pt))
    path.append(path[0])
    return path


def spectral_flow(models, path, group, dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Sorted spectra of the interpolated model along a simplex path.

    Returns an array of shape (len(path), dim).
    """
    from .operators import interpolate, represent_periodic

    out = []
    for weights in path:
        h = interpolate(models, weights)
        spec = exact_spectrum(represent_periodic(h, group), dense_cap=dense_cap)
        out.append(spec.eigenvalues)
    return np.array(out)


def ldos(
    spec: SpectrumResult, energy: float, delta_e: float, site_weights=None
) -> np.ndarray:
    """Gaussian-broadened local density of states per site.

    LDOS(E, z) = sum_n exp(-|E_n - E|^2 / (2 dE^2)) |psi_n(z)|^2.
    """
    if spec.eigenvectors is None:
        raise ConfigError("ldos needs eigenvectors; diagonalize with want_vectors=True")
    if delta_e <= 0:
        raise ConfigError("delta_e must be positive")
    w = np.exp(-((spec.eigenvalues - energy) ** 2) / (2.0 * delta_e**2))
    out = (np.abs(spec.eigenvectors) ** 2) @ w
    if site_weights is not None:
        out = out * np.asarray(site_weights, dtype=float)
    return out


def eigenpairs_near(
    mat, center: float = 0.0, half_width: float = 0.25, seed: int = 0, k_start: int = 32
) -> SpectrumResult:
    """Eigenpairs within |E - center| <= half_width via shift-invert.

    Grows the requested count until the window is covered (or the whole
    spectrum is returned).  Deterministic for a fixed seed.
    """
    n = mat.shape[0]
    if n <= DENSE_CAP:
        full = exact_spectrum(mat, want_vectors=True)
        mask = np.abs(full.eigenvalues - center) <= half_width
        return SpectrumResult(full.eigenvalues[mask], full.eigenvectors[:, mask])
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    k = min(k_start, n - 2)
    while True:
        vals, vecs = spla.eigsh(mat.tocsc(), k=k, sigma=center, which="LM", v0=v0)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        covered = np.abs(vals - center).max() > half_width
        if covered or k >= n - 2:
            mask = np.abs(vals - center) <= half_width
            return SpectrumResult(vals[mask], vecs[:, mask])
        k = min(2 * k, n - 2)


def write_curve_csv(curve: DOSCurve, path: str) -> None:
    """CSV of (energy, value) plus a JSON metadata sidecar."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["energy", "value"])
        for e, v in zip(curve.energies, curve.values):
            writer.writerow([f"{e:.17g}", f"{v:.17g}"])
    with open(path + ".meta.json", "w") as fh:
        json.dump(curve.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_spectrum_csv(spec: SpectrumResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue"])
        for i, e in enumerate(spec.eigenvalues):
            writer.writerow([i, f"{e:.17g}"])
