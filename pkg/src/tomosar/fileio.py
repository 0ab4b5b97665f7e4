"""On-disk interchange formats.

TSR3 tensor container (little-endian):

    bytes 0..3   magic "TSR3"
    byte  4      format version, currently 1
    byte  5      dtype code, 0 = complex64
    bytes 6..7   reserved, zero
    bytes 8..19  three uint32 dims (d0, d1, d2)
    payload      d0*d1*d2 complex64 values, (re, im) float32 pairs,
                 C order (last index fastest)

Tensors are complex128 in memory and complex64 on disk.  All text formats
(JSON, CSV) are written with canonical formatting so identical data produces
identical bytes.
"""

import json
import struct

import numpy as np

from .errors import ConfigurationError
from .sensing import SystemGeometry

TSR3_MAGIC = b"TSR3"
TSR3_VERSION = 1
TSR3_DTYPE_COMPLEX64 = 0
_HEADER = struct.Struct("<4sBBBBIII")


def write_tensor(path, t):
    """Write an order-3 complex tensor as a TSR3 file."""
    t = np.asarray(t)
    if t.ndim != 3 or t.size == 0:
        raise ValueError(f"expected a nonempty order-3 tensor, got shape {t.shape}")
    d0, d1, d2 = t.shape
    header = _HEADER.pack(TSR3_MAGIC, TSR3_VERSION, TSR3_DTYPE_COMPLEX64, 0, 0, d0, d1, d2)
    payload = np.ascontiguousarray(t, dtype="<c8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_tensor(path):
    """Read a TSR3 file back as a complex128 tensor."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ConfigurationError(f"{path}: truncated TSR3 header")
    magic, version, dtype, r0, r1, d0, d1, d2 = _HEADER.unpack_from(raw)
    if magic != TSR3_MAGIC:
        raise ConfigurationError(f"{path}: bad magic {magic!r}")
    if version != TSR3_VERSION:
        raise ConfigurationError(f"{path}: unsupported version {version}")
    if dtype != TSR3_DTYPE_COMPLEX64:
        raise ConfigurationError(f"{path}: unsupported dtype code {dtype}")
    if min(d0, d1, d2) == 0:
        raise ConfigurationError(f"{path}: empty tensor extent ({d0}, {d1}, {d2})")
    n = d0 * d1 * d2
    expected = _HEADER.size + 8 * n
    if len(raw) != expected:
        raise ConfigurationError(f"{path}: payload size {len(raw) - _HEADER.size} != {8 * n}")
    data = np.frombuffer(raw, dtype="<c8", offset=_HEADER.size, count=n)
    return data.reshape(d0, d1, d2).astype(np.complex128)


def write_json(path, obj):
    """Canonical JSON: sorted keys, 2-space indent, trailing newline."""
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_geometry(path, g: SystemGeometry):
    write_json(
        path,
        {
            "wavelength_m": g.wavelength_m,
            "baselines_m": [float(b) for b in g.baselines_m],
            "reference_slant_range_m": g.reference_slant_range_m,
            "reference_incidence_deg": g.reference_incidence_deg,
            "elevation_grid_m": [float(s) for s in g.elevation_grid_m],
        },
    )


def read_geometry(path) -> SystemGeometry:
    obj = read_json(path)
    try:
        return SystemGeometry(
            wavelength_m=float(obj["wavelength_m"]),
            baselines_m=np.asarray(obj["baselines_m"], dtype=np.float64),
            reference_slant_range_m=float(obj["reference_slant_range_m"]),
            reference_incidence_deg=float(obj["reference_incidence_deg"]),
            elevation_grid_m=np.asarray(obj["elevation_grid_m"], dtype=np.float64),
        )
    except KeyError as exc:
        raise ConfigurationError(f"{path}: missing geometry key {exc}") from exc


def write_point_cloud(path, cloud):
    """Write a point cloud as CSV with header x,y,z,amplitude,phase."""
    lines = ["x,y,z,amplitude,phase"]
    for (x, y, z), amp, ph in zip(cloud.xyz, cloud.amplitude, cloud.phase):
        # plain-float repr: shortest string that roundtrips float64 exactly
        lines.append(",".join(repr(float(v)) for v in (x, y, z, amp, ph)))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def read_point_cloud(path):
    from .simulate import PointCloud

    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "x,y,z,amplitude,phase":
        raise ValueError(f"{path}: expected header 'x,y,z,amplitude,phase'")
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    if rows and any(len(r) != 5 for r in rows):
        raise ValueError(f"{path}: malformed row")
    arr = np.asarray(rows, dtype=np.float64).reshape(-1, 5)
    return PointCloud(xyz=arr[:, :3], amplitude=arr[:, 3], phase=arr[:, 4])


def write_lista_params(path, params):
    write_json(
        path,
        {
            "blocks": int(params.blocks),
            "alpha": [float(a) for a in params.alpha],
            "theta": [float(t) for t in params.theta],
        },
    )


def read_lista_params(path):
    from .solvers import LearnedIstaParams

    obj = read_json(path)
    try:
        params = LearnedIstaParams(
            alpha=np.asarray(obj["alpha"], dtype=np.float64),
            theta=np.asarray(obj["theta"], dtype=np.float64),
        )
    except KeyError as exc:
        raise ConfigurationError(f"{path}: missing parameter key {exc}") from exc
    if params.blocks != int(obj["blocks"]):
        raise ConfigurationError(f"{path}: blocks field does not match array lengths")
    return params


RESOLUTION_CURVE_HEADER = (
    "separation_rho_s,success_rate,mean_pos_lo_m,mean_pos_hi_m,"
    "std_pos_lo_m,std_pos_hi_m,trials,crlb"
)


def write_resolution_curve(path, rows):
    """Write resolution-test rows; the crlb column is reserved and left empty."""
    lines = [RESOLUTION_CURVE_HEADER]
    for r in rows:
        lines.append(
            f"{float(r['separation_rho_s'])!r},{float(r['success_rate'])!r},"
            f"{_opt(r['mean_pos_lo_m'])},{_opt(r['mean_pos_hi_m'])},"
            f"{_opt(r['std_pos_lo_m'])},{_opt(r['std_pos_hi_m'])},"
            f"{int(r['trials'])},"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def _opt(v):
    return "" if v is None else repr(float(v))


def read_resolution_curve(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != RESOLUTION_CURVE_HEADER:
        raise ValueError(f"{path}: unexpected resolution curve header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 8:
            raise ValueError(f"{path}: malformed row {ln!r}")
        rows.append(
            {
                "separation_rho_s": float(parts[0]),
                "success_rate": float(parts[1]),
                "mean_pos_lo_m": None if parts[2] == "" else float(parts[2]),
                "mean_pos_hi_m": None if parts[3] == "" else float(parts[3]),
                "std_pos_lo_m": None if parts[4] == "" else float(parts[4]),
                "std_pos_hi_m": None if parts[5] == "" else float(parts[5]),
                "trials": int(parts[6]),
                "crlb": None if parts[7] == "" else float(parts[7]),
            }
        )
    return rows
