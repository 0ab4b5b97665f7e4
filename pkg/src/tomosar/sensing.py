"""Array acquisition model: geometry, steering matrix, forward operator, noise.

The sensing model ties an elevation fiber x (length n_z, one complex
reflectivity per elevation grid position) to an echo fiber y (length n_e, one
complex sample per array element) through y = A x.  Applied to a full scene
tensor the operator acts independently on every (range, azimuth) fiber.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import tensor
from .errors import ConfigurationError

# Airborne array campaign constants used by the default geometry.
DEFAULT_WAVELENGTH_M = 0.031
DEFAULT_SLANT_RANGE_M = 2040.3406
DEFAULT_INCIDENCE_DEG = 31.6453
DEFAULT_REFERENCE_HEIGHT_M = 1736.9668
DEFAULT_N_ELEMENTS = 12


@dataclass(frozen=True)
class SystemGeometry:
    """Acquisition geometry for one array data take.

    baselines_m are perpendicular element offsets from the reference track;
    elevation_grid_m are the strictly increasing elevation positions (meters,
    perpendicular to the reference line of sight) that reconstruction
    resolves.
    """

    wavelength_m: float
    baselines_m: np.ndarray
    reference_slant_range_m: float
    reference_incidence_deg: float
    elevation_grid_m: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.baselines_m, dtype=np.float64)
        s = np.asarray(self.elevation_grid_m, dtype=np.float64)
        object.__setattr__(self, "baselines_m", b)
        object.__setattr__(self, "elevation_grid_m", s)
        if not (self.wavelength_m > 0):
            raise ConfigurationError(f"wavelength must be positive, got {self.wavelength_m}")
        if not (self.reference_slant_range_m > 0):
            raise ConfigurationError(
                f"reference slant range must be positive, got {self.reference_slant_range_m}"
            )
        if not (0 < self.reference_incidence_deg < 90):
            raise ConfigurationError(
                f"reference incidence must be in (0, 90) degrees, got {self.reference_incidence_deg}"
            )
        if b.ndim != 1 or b.size < 2:
            raise ConfigurationError("need at least 2 baselines")
        if s.ndim != 1 or s.size < 2:
            raise ConfigurationError("need at least 2 elevation grid positions")
        if not np.all(np.diff(s) > 0):
            raise ConfigurationError("elevation grid must be strictly increasing")

    @property
    def n_elements(self):
        return int(self.baselines_m.size)

    @property
    def n_elevations(self):
        return int(self.elevation_grid_m.size)

    @property
    def aperture_m(self):
        return float(self.baselines_m.max() - self.baselines_m.min())

    @property
    def reference_height_m(self):
        """Platform height above the reference point on the ground."""
        return self.reference_slant_range_m * math.cos(math.radians(self.reference_incidence_deg))


def theoretical_resolution(g: SystemGeometry) -> float:
    """Rayleigh elevation resolution: wavelength * range / (2 * aperture)."""
    if g.aperture_m <= 0:
        raise ConfigurationError("aperture must be positive for a resolution estimate")
    return g.wavelength_m * g.reference_slant_range_m / (2.0 * g.aperture_m)


def default_geometry(
    n_elements: int = DEFAULT_N_ELEMENTS,
    aperture_m: float = 10.0,
    n_elevations: int = 64,
    elevation_span_factor: float = 8.0,
) -> SystemGeometry:
    """Desk-scale default geometry.

    Baselines are uniform and centered on zero.  The elevation grid is
    uniform with cell size span_factor * resolution / n_elevations and is
    anchored so index n_elevations // 2 sits exactly at elevation 0 (the
    reference point maps to the central grid index).
    """
    if n_elements < 2 or n_elevations < 2:
        raise ConfigurationError("need at least 2 elements and 2 elevation positions")
    if aperture_m <= 0:
        raise ConfigurationError("aperture must be positive")
    baselines = np.linspace(-aperture_m / 2.0, aperture_m / 2.0, n_elements)
    rho = DEFAULT_WAVELENGTH_M * DEFAULT_SLANT_RANGE_M / (2.0 * aperture_m)
    cell = elevation_span_factor * rho / n_elevations
    grid = (np.arange(n_elevations) - n_elevations // 2) * cell
    return SystemGeometry(
        wavelength_m=DEFAULT_WAVELENGTH_M,
        baselines_m=baselines,
        reference_slant_range_m=DEFAULT_SLANT_RANGE_M,
        reference_incidence_deg=DEFAULT_INCIDENCE_DEG,
        elevation_grid_m=grid,
    )


def build_steering_matrix(g: SystemGeometry) -> np.ndarray:
    """Steering matrix A with A[m, n] = exp(j 4 pi s_n b_m / (lambda R0)).

    Shape (n_elements, n_elevations); every entry has unit modulus.  Column n
    is the array response of a unit scatterer at elevation s_n.
    """
    scale = 4.0 * np.pi / (g.wavelength_m * g.reference_slant_range_m)
    phase = scale * np.outer(g.baselines_m, g.elevation_grid_m)
    return np.exp(1j * phase)


def forward(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply the sensing operator fiber-by-fiber to a scene tensor.

    x has shape (n_z, n_x, n_y); the result has shape (n_e, n_x, n_y) and
    equals a @ x[:, j, k] on every fiber.
    """
    tensor._check3d(x)
    n_e, n_z = a.shape
    d0, d1, d2 = x.shape
    if d0 != n_z:
        raise ValueError(f"scene elevation extent {d0} does not match matrix columns {n_z}")
    return (a @ x.reshape(d0, d1 * d2)).reshape(n_e, d1, d2)


def adjoint(a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Apply the conjugate-transpose operator fiber-by-fiber to an echo tensor."""
    tensor._check3d(y)
    n_e, n_z = a.shape
    d0, d1, d2 = y.shape
    if d0 != n_e:
        raise ValueError(f"echo channel extent {d0} does not match matrix rows {n_e}")
    return (a.conj().T @ y.reshape(d0, d1 * d2)).reshape(n_z, d1, d2)


def fiber_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based substream for one fiber (or trial) of a seeded run.

    Streams are independent of evaluation order, so noise draws do not
    depend on how work is scheduled across threads.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def _noise_sigma(y, snr_db):
    power = float(np.mean(np.abs(y) ** 2))
    if power == 0.0:
        raise ValueError("cannot scale noise against an all-zero echo")
    return math.sqrt(power / (10.0 ** (snr_db / 10.0)))


def add_noise(y: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """Add circular complex white Gaussian noise at the given echo SNR.

    SNR is defined over all echo entries: 10 log10(mean |y|^2 / var(noise)).
    Real and imaginary parts are each N(0, var/2).  Every fiber draws from
    its own counter-based substream of ``seed``, so the result is identical
    no matter how fibers are scheduled.  snr_db = +inf returns a copy.
    """
    tensor._check3d(y)
    if math.isnan(snr_db) or (math.isinf(snr_db) and snr_db < 0):
        raise ValueError(f"snr_db must be finite or +inf, got {snr_db}")
    if math.isinf(snr_db):
        return y.copy()
    sigma = _noise_sigma(y, snr_db)
    d0, d1, d2 = y.shape
    out = y.copy()
    flat = out.reshape(d0, d1 * d2)
    for f in range(d1 * d2):
        g = fiber_rng(seed, f)
        draws = g.standard_normal(2 * d0)
        flat[:, f] += (sigma / math.sqrt(2.0)) * (draws[:d0] + 1j * draws[d0:])
    return out


def noise_for_fiber(n_e: int, sigma: float, seed: int, index: int) -> np.ndarray:
    """One fiber's worth of circular complex noise from its substream."""
    g = fiber_rng(seed, index)
    draws = g.standard_normal(2 * n_e)
    return (sigma / math.sqrt(2.0)) * (draws[:n_e] + 1j * draws[n_e:])


def spectral_norm_sq(a: np.ndarray, iters: int = 50) -> float:
    """Largest eigenvalue of a^H a by power iteration (squared spectral norm).

    Deterministic: the start vector comes from a fixed internal seed.  The
    returned Rayleigh quotient estimate is monotone nondecreasing in
    ``iters`` and bounded above by the squared Frobenius norm.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"expected a nonempty matrix, got shape {a.shape}")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    g = np.random.Generator(np.random.Philox(np.random.SeedSequence(0x5EED)))
    v = g.standard_normal(a.shape[1]) + 1j * g.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = a.conj().T @ (a @ v)
        est = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    return est
