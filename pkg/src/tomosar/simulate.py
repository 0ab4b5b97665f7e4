"""Scene simulation: building point clouds, grid projection, echo synthesis.

Pipeline: generate_building -> normalize -> (augment) -> project_to_grid ->
generate_echo.  Building models live in a local ground frame (x azimuth,
y ground range increasing away from the sensor, z height, meters).
Projection converts each point to per-point slant range R and perpendicular
elevation s against a single sensor reference position, quantizes to the
nearest voxel, assigns a random amplitude in [1, 4) and the two-way
propagation phase (-4 pi R / lambda) mod 2 pi.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import tensor
from .errors import ConfigurationError
from .sensing import SystemGeometry, add_noise, forward, theoretical_resolution

BUILDING_KINDS = ("box", "l_shape", "one_step", "multi_step", "flat")


@dataclass
class PointCloud:
    """Columnar point set: xyz (n, 3), amplitude (n,), phase (n,), all float64."""

    xyz: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        self.xyz = np.asarray(self.xyz, dtype=np.float64).reshape(-1, 3)
        n = self.xyz.shape[0]
        self.amplitude = np.asarray(self.amplitude, dtype=np.float64).reshape(-1)
        self.phase = np.asarray(self.phase, dtype=np.float64).reshape(-1)
        if self.amplitude.shape != (n,) or self.phase.shape != (n,):
            raise ValueError("amplitude/phase length does not match point count")
        if n and np.any(self.amplitude < 0):
            raise ValueError("amplitudes must be nonnegative")

    @property
    def n_points(self):
        return int(self.xyz.shape[0])

    @classmethod
    def from_xyz(cls, xyz):
        xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
        n = xyz.shape[0]
        return cls(xyz=xyz, amplitude=np.ones(n), phase=np.zeros(n))


@dataclass(frozen=True)
class BuildingModel:
    """Parametric building in the local ground frame.

    look_direction is the unit vector from the scene toward the sensor; it
    drives back-face culling during surface sampling.
    """

    kind: str
    width_m: float = 12.0
    depth_m: float = 10.0
    height_m: float = 12.0
    n_steps: int = 3
    apron_m: float | None = None
    look_direction: tuple = None

    def __post_init__(self):
        if self.kind not in BUILDING_KINDS:
            raise ConfigurationError(f"unknown building kind {self.kind!r}; choose from {BUILDING_KINDS}")
        if min(self.width_m, self.depth_m, self.height_m) <= 0:
            raise ConfigurationError("building dimensions must be positive")
        if self.kind == "multi_step" and self.n_steps < 2:
            raise ConfigurationError("multi_step needs n_steps >= 2")
        if self.look_direction is None:
            theta = math.radians(31.6453)
            object.__setattr__(self, "look_direction", (0.0, -math.sin(theta), math.cos(theta)))
        look = np.asarray(self.look_direction, dtype=np.float64)
        nrm = np.linalg.norm(look)
        if not (nrm > 0):
            raise ConfigurationError("look_direction must be a nonzero vector")
        object.__setattr__(self, "look_direction", tuple(look / nrm))

    @classmethod
    def preset(cls, kind, **overrides):
        dims = {
            "box": dict(width_m=12.0, depth_m=10.0, height_m=14.0),
            "one_step": dict(width_m=12.0, depth_m=8.0, height_m=10.0),
            "multi_step": dict(width_m=12.0, depth_m=12.0, height_m=12.0, n_steps=3),
            "l_shape": dict(width_m=14.0, depth_m=12.0, height_m=10.0),
            "flat": dict(width_m=16.0, depth_m=14.0, height_m=2.5),
        }
        if kind not in dims:
            raise ConfigurationError(f"unknown building kind {kind!r}; choose from {BUILDING_KINDS}")
        cfg = dims[kind]
        cfg.update(overrides)
        return cls(kind=kind, **cfg)


@dataclass(frozen=True)
class GridSpec:
    """Voxel grid in the slant frame: (elevation, slant range, azimuth).

    Origins are the physical coordinates of voxel (0, 0, 0)'s center in
    meters: origin_z elevation, origin_x slant range, origin_y azimuth.
    """

    n_z: int
    n_x: int
    n_y: int
    cell_z: float
    cell_x: float
    cell_y: float
    origin_z: float
    origin_x: float
    origin_y: float

    def __post_init__(self):
        if min(self.n_z, self.n_x, self.n_y) < 1:
            raise ConfigurationError(f"grid extents must be positive: {self.dims}")
        if min(self.cell_z, self.cell_x, self.cell_y) <= 0:
            raise ConfigurationError("cell sizes must be positive")

    @property
    def dims(self):
        return (self.n_z, self.n_x, self.n_y)

    @property
    def voxel_diagonal(self):
        return math.sqrt(self.cell_z**2 + self.cell_x**2 + self.cell_y**2)

    @property
    def center_index(self):
        return (self.n_z // 2, self.n_x // 2, self.n_y // 2)

    @classmethod
    def from_geometry(cls, g: SystemGeometry, n_x=64, n_y=64, cell_x=0.5, cell_y=0.5):
        """Grid whose elevation axis coincides with the geometry's grid.

        Requires a uniform elevation grid.  Range and azimuth axes are
        centered on the reference slant range and zero azimuth.
        """
        steps = np.diff(g.elevation_grid_m)
        cell_z = float(steps[0])
        if not np.allclose(steps, cell_z, rtol=1e-9, atol=1e-12):
            raise ConfigurationError("geometry elevation grid must be uniform to derive a GridSpec")
        return cls(
            n_z=g.n_elevations,
            n_x=int(n_x),
            n_y=int(n_y),
            cell_z=cell_z,
            cell_x=float(cell_x),
            cell_y=float(cell_y),
            origin_z=float(g.elevation_grid_m[0]),
            origin_x=g.reference_slant_range_m - float(cell_x) * (int(n_x) // 2),
            origin_y=-float(cell_y) * (int(n_y) // 2),
        )


def _sample_facet(origin, e1, e2, spacing, rng, jitter):
    """Grid-sample a parallelogram facet including its edges."""
    l1 = np.linalg.norm(e1)
    l2 = np.linalg.norm(e2)
    n1 = max(1, int(round(l1 / spacing)))
    n2 = max(1, int(round(l2 / spacing)))
    u = np.linspace(0.0, 1.0, n1 + 1)
    v = np.linspace(0.0, 1.0, n2 + 1)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = (
        np.asarray(origin)[None, :]
        + uu.ravel()[:, None] * np.asarray(e1)[None, :]
        + vv.ravel()[:, None] * np.asarray(e2)[None, :]
    )
    if jitter > 0:
        d1 = np.asarray(e1) / l1
        d2 = np.asarray(e2) / l2
        off = rng.uniform(-jitter, jitter, size=(pts.shape[0], 2))
        pts = pts + off[:, :1] * d1[None, :] + off[:, 1:] * d2[None, :]
    return pts


def _facets_for(model: BuildingModel):
    """Rectangular facets as (origin, edge1, edge2, outward normal)."""
    w, d, h = model.width_m, model.depth_m, model.height_m
    apron = model.apron_m if model.apron_m is not None else d
    ex = np.array([1.0, 0.0, 0.0])
    ey = np.array([0.0, 1.0, 0.0])
    ez = np.array([0.0, 0.0, 1.0])
    facets = []

    def add(origin, e1, e2, normal):
        facets.append((np.asarray(origin, float), np.asarray(e1, float), np.asarray(e2, float), np.asarray(normal, float)))

    # Ground apron on the sensor side, shared by every kind.
    add([0.0, -apron, 0.0], w * ex, apron * ey, ez)

    if model.kind in ("box", "flat"):
        add([0.0, 0.0, 0.0], w * ex, h * ez, -ey)          # front wall
        add([0.0, d, 0.0], w * ex, h * ez, ey)             # back wall
        add([0.0, 0.0, 0.0], d * ey, h * ez, -ex)          # left wall
        add([w, 0.0, 0.0], d * ey, h * ez, ex)             # right wall
        add([0.0, 0.0, h], w * ex, d * ey, ez)             # roof
    elif model.kind == "one_step":
        add([0.0, 0.0, 0.0], w * ex, h * ez, -ey)          # facade
        add([0.0, d, 0.0], w * ex, h * ez, ey)             # back wall
        add([0.0, 0.0, h], w * ex, d * ey, ez)             # roof
    elif model.kind == "multi_step":
        n = model.n_steps
        dh, dd = h / n, d / n
        for i in range(n):
            add([0.0, i * dd, i * dh], w * ex, dh * ez, -ey)        # riser facade
            add([0.0, i * dd, (i + 1) * dh], w * ex, dd * ey, ez)   # tread roof
        add([0.0, d, 0.0], w * ex, h * ez, ey)             # back wall
    elif model.kind == "l_shape":
        w2, d1 = w / 2.0, d / 2.0
        add([0.0, 0.0, 0.0], w * ex, h * ez, -ey)          # front wall, full width
        add([0.0, 0.0, h], w * ex, d1 * ey, ez)            # roof of the front block
        add([0.0, d1, h], w2 * ex, (d - d1) * ey, ez)      # roof of the rear wing
        add([0.0, d, 0.0], w2 * ex, h * ez, ey)            # wing back wall
        add([w2, d1, 0.0], (d - d1) * ey, h * ez, ex)      # exposed wing flank
        add([w2, d1, 0.0], (w - w2) * ex, h * ez, ey)      # rear wall of the front block
    return facets


def generate_building(model: BuildingModel, spacing: float, seed: int) -> PointCloud:
    """Surface-sample the visible facets of a building model.

    Facets whose outward normal does not face the sensor (dot product with
    the look direction <= 0) are dropped, approximating self-occlusion.
    Sample positions get a small in-plane jitter drawn from ``seed``.
    """
    if spacing <= 0:
        raise ConfigurationError(f"spacing must be positive, got {spacing}")
    look = np.asarray(model.look_direction, dtype=np.float64)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    jitter = 0.2 * spacing
    chunks = []
    for origin, e1, e2, normal in _facets_for(model):
        if float(np.dot(normal, look)) <= 0.0:
            continue
        chunks.append(_sample_facet(origin, e1, e2, spacing, rng, jitter))
    if not chunks:
        raise ConfigurationError("no facet faces the sensor; check look_direction")
    return PointCloud.from_xyz(np.concatenate(chunks, axis=0))


def normalize(p: PointCloud) -> PointCloud:
    """Shift minima to zero and divide all axes by the single largest span."""
    if p.n_points == 0:
        raise ValueError("cannot normalize an empty cloud")
    shifted = p.xyz - p.xyz.min(axis=0, keepdims=True)
    div = float(shifted.max())
    if div == 0.0:
        raise ValueError("cannot normalize a cloud with zero extent on every axis")
    return PointCloud(xyz=shifted / div, amplitude=p.amplitude.copy(), phase=p.phase.copy())


def augment(p: PointCloud, scale_range, translate_range, seed: int) -> PointCloud:
    """Random uniform rescale plus per-axis translation, clamped to [0,1]^3.

    translate_range is a (lo, hi) pair applied independently per axis.  If
    the drawn transform maps the whole unit cube outside [0,1] on any axis, a
    ConfigurationError is raised instead of silently collapsing the cloud
    onto a face.
    """
    lo, hi = float(scale_range[0]), float(scale_range[1])
    if not (0 < lo <= hi):
        raise ConfigurationError(f"scale_range must satisfy 0 < lo <= hi, got {scale_range}")
    tlo, thi = float(translate_range[0]), float(translate_range[1])
    if tlo > thi:
        raise ConfigurationError(f"translate_range must satisfy lo <= hi, got {translate_range}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    scale = float(rng.uniform(lo, hi))
    shift = rng.uniform(tlo, thi, size=3)
    for axis in range(3):
        if shift[axis] > 1.0 or scale + shift[axis] < 0.0:
            raise ConfigurationError(
                f"transform (scale {scale:.3g}, shift {shift[axis]:.3g}) leaves [0,1] empty on axis {axis}"
            )
    xyz = np.clip(p.xyz * scale + shift[None, :], 0.0, 1.0)
    return PointCloud(xyz=xyz, amplitude=p.amplitude.copy(), phase=p.phase.copy())


def project_to_grid(p: PointCloud, g: SystemGeometry, grid: GridSpec, seed: int, scene_size_m=None):
    """Project a normalized cloud into the voxel grid of the slant frame.

    Returns (scene tensor, info dict).  The normalized cube is scaled to
    ``scene_size_m`` meters and centered on the scene reference point (slant
    range R0 on the reference line of sight).  Per point: exact slant range
    R to the sensor reference position, elevation s measured perpendicular
    to the reference line of sight, nearest-voxel quantization, amplitude
    uniform in [1, 4), phase (-4 pi R / lambda) mod 2 pi.  Out-of-grid
    points and voxel collisions are counted, never fatal.
    """
    if p.n_points == 0:
        raise ValueError("cannot project an empty cloud")
    u = p.xyz
    if u.min() < -1e-9 or u.max() > 1.0 + 1e-9:
        raise ConfigurationError("cloud must be normalized to [0,1]^3 before projection")
    if scene_size_m is None:
        scene_size_m = 0.5 * min(
            grid.n_z * grid.cell_z, grid.n_x * grid.cell_x, grid.n_y * grid.cell_y
        )
    if scene_size_m <= 0:
        raise ConfigurationError("scene_size_m must be positive")

    theta = math.radians(g.reference_incidence_deg)
    r0 = g.reference_slant_range_m
    # Sensor reference position relative to the scene center, (ground, height).
    sensor_y = -r0 * math.sin(theta)
    sensor_z = r0 * math.cos(theta)

    az = (u[:, 0] - 0.5) * scene_size_m
    vy = (u[:, 1] - 0.5) * scene_size_m - sensor_y
    vz = (u[:, 2] - 0.5) * scene_size_m - sensor_z
    r = np.hypot(vy, vz)
    s = vy * math.cos(theta) + vz * math.sin(theta)

    iz = np.rint((s - grid.origin_z) / grid.cell_z).astype(np.int64)
    ix = np.rint((r - grid.origin_x) / grid.cell_x).astype(np.int64)
    iy = np.rint((az - grid.origin_y) / grid.cell_y).astype(np.int64)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    amps = rng.uniform(1.0, 4.0, size=p.n_points)
    phases = np.mod(-4.0 * np.pi * r / g.wavelength_m, 2.0 * np.pi)

    inside = (
        (iz >= 0) & (iz < grid.n_z) & (ix >= 0) & (ix < grid.n_x) & (iy >= 0) & (iy < grid.n_y)
    )
    dropped = int(p.n_points - int(inside.sum()))
    iz, ix, iy = iz[inside], ix[inside], iy[inside]
    amps_in, phases_in = amps[inside], phases[inside]

    flat = (iz * grid.n_x + ix) * grid.n_y + iy
    _, first = np.unique(flat, return_index=True)
    collisions = int(flat.size - first.size)

    t = np.zeros(grid.dims, dtype=np.complex128)
    keep = np.sort(first)
    t[iz[keep], ix[keep], iy[keep]] = amps_in[keep] * np.exp(1j * phases_in[keep])
    info = {
        "n_points": p.n_points,
        "placed": int(first.size),
        "dropped_out_of_grid": dropped,
        "collisions": collisions,
        "scene_size_m": float(scene_size_m),
    }
    return t, info


def generate_echo(x: np.ndarray, a: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """Forward-project a scene tensor and add noise at the requested SNR."""
    y = forward(a, x)
    if not np.any(y):
        if math.isinf(snr_db):
            return y
        raise ValueError("cannot add finite-SNR noise to an all-zero echo")
    return add_noise(y, snr_db, seed)


def _paint_segments(t, segments):
    for seg in segments:
        for iz, ix, iy in seg:
            t[iz, ix, iy] = 1.0 + 0.0j
    return t


def make_test_object(kind: str, g: SystemGeometry, grid: GridSpec, seed: int = 0, **params):
    """Canonical ground-truth tensors for the benchmark tests.

    Kinds: "two_scatterers" (param separation_rho in multiples of the
    Rayleigh resolution), "one_step", "multi_step" (axis-aligned voxel
    structures), and "building:<kind>" (full point-cloud pipeline).  Returns
    (scene tensor, metadata dict); metadata lists the true scatterer voxels.
    """
    n_z, n_x, n_y = grid.dims
    meta = {"kind": kind, "seed": int(seed)}

    if kind == "two_scatterers":
        sep = float(params.get("separation_rho", 1.0))
        if sep < 0:
            raise ConfigurationError(f"separation must be >= 0, got {sep}")
        rho = theoretical_resolution(g)
        gap = int(round(sep * rho / grid.cell_z))
        if gap >= n_z:
            raise ConfigurationError(f"separation {sep} rho_s exceeds the elevation extent")
        jx, jy = n_x // 2, n_y // 2
        k_lo = (n_z - gap) // 2
        k_hi = k_lo + gap
        t = np.zeros(grid.dims, dtype=np.complex128)
        t[k_lo, jx, jy] += 1.0
        t[k_hi, jx, jy] += 1.0
        meta.update(
            {
                "separation_rho": sep,
                "separation_m": gap * grid.cell_z,
                "rho_s_m": rho,
                "true_voxels": [[k_lo, jx, jy], [k_hi, jx, jy]],
                "true_elevations_m": [
                    grid.origin_z + k_lo * grid.cell_z,
                    grid.origin_z + k_hi * grid.cell_z,
                ],
            }
        )
        return t, meta

    if kind in ("one_step", "multi_step"):
        t = np.zeros(grid.dims, dtype=np.complex128)
        n_steps = 1 if kind == "one_step" else int(params.get("n_steps", 3))
        azimuth_span = [n_y // 2] if kind == "one_step" else list(
            range(max(0, n_y // 2 - n_y // 8), min(n_y, n_y // 2 + n_y // 8 + 1))
        )
        run = max(2, n_x // (2 * (n_steps + 1)))
        rise = max(2, n_z // (2 * (n_steps + 1)))
        x_start = n_x // 2 - (n_steps + 1) * run // 2
        z_ground = n_z // 2 - (n_steps * rise) // 2
        segments = []
        for iy in azimuth_span:
            x_cur = x_start
            z_cur = z_ground
            ground = [(z_cur, ix, iy) for ix in range(max(0, x_cur - run), x_cur + 1)]
            segments.append(ground)
            for _ in range(n_steps):
                wall = [(iz, x_cur, iy) for iz in range(z_cur, z_cur + rise + 1)]
                z_cur += rise
                roof = [(z_cur, ix, iy) for ix in range(x_cur, min(n_x, x_cur + run) + 1)]
                x_cur += run
                segments.append(wall)
                segments.append(roof)
        _paint_segments(t, segments)
        occupied = np.argwhere(np.abs(t) > 0)
        meta.update(
            {
                "n_steps": n_steps,
                "true_voxels": occupied.tolist(),
                "segments_per_slice": 1 + 2 * n_steps,
            }
        )
        return t, meta

    if kind.startswith("building:"):
        bkind = kind.split(":", 1)[1]
        model = BuildingModel.preset(bkind)
        spacing = float(params.get("spacing_m", 0.5))
        cloud = normalize(generate_building(model, spacing, seed))
        if params.get("augment", False):
            cloud = augment(
                cloud,
                params.get("scale_range", (0.7, 1.0)),
                params.get("translate_range", (-0.1, 0.1)),
                seed,
            )
        t, info = project_to_grid(cloud, g, grid, seed, scene_size_m=params.get("scene_size_m"))
        occupied = np.argwhere(np.abs(t) > 0)
        meta.update({"building_kind": bkind, "spacing_m": spacing, "true_voxels": occupied.tolist()})
        meta.update(info)
        return t, meta

    raise ConfigurationError(
        f"unknown test object {kind!r}; expected two_scatterers, one_step, multi_step, or building:<kind>"
    )


def make_fiber_dataset(a: np.ndarray, n_fibers: int, seed: int, snr_db: float = 5.0, max_scatterers: int = 3):
    """Paired (echo, truth) fiber matrices for learned-solver training.

    Returns (Y, X) with Y of shape (n_e, n_fibers) and X of shape
    (n_z, n_fibers).  Fiber i draws its scatterer count, positions,
    amplitudes, phases, and noise from substream (seed, i), so the dataset
    is independent of generation order.
    """
    if n_fibers < 1:
        raise ConfigurationError("need at least one fiber")
    n_e, n_z = a.shape
    X = np.zeros((n_z, n_fibers), dtype=np.complex128)
    Y = np.zeros((n_e, n_fibers), dtype=np.complex128)
    for i in range(n_fibers):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(i,))))
        k = int(rng.integers(1, max_scatterers + 1))
        bins = rng.choice(n_z, size=k, replace=False)
        amps = rng.uniform(1.0, 4.0, size=k)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=k)
        x = np.zeros(n_z, dtype=np.complex128)
        x[bins] = amps * np.exp(1j * phases)
        y = a @ x
        if not math.isinf(snr_db):
            power = float(np.mean(np.abs(y) ** 2))
            sigma = math.sqrt(power / (10.0 ** (snr_db / 10.0)))
            draws = rng.standard_normal(2 * n_e)
            y = y + (sigma / math.sqrt(2.0)) * (draws[:n_e] + 1j * draws[n_e:])
        X[:, i] = x
        Y[:, i] = y
    return Y, X
