"""Order-3 complex tensor algebra for scene volumes.

A scene volume is a complex ndarray of shape (n_z, n_x, n_y): elevation,
slant range, azimuth.  An echo volume has shape (n_e, n_x, n_y) with the
array channel replacing elevation.  All routines here treat tensors as plain
``numpy`` arrays; there is no wrapper class.

Slice naming convention (fixed once, used everywhere):

* horizontal slice ``t[i, :, :]``  shape (n_x, n_y), axis 0 fixed
* lateral    slice ``t[:, j, :]``  shape (n_z, n_y), axis 1 fixed
* frontal    slice ``t[:, :, k]``  shape (n_z, n_x), axis 2 fixed

A fiber is ``t[:, j, k]``, the vector along axis 0 at one (range, azimuth)
position.
"""

import numpy as np

HORIZONTAL = 0
LATERAL = 1
FRONTAL = 2

_AXES = (HORIZONTAL, LATERAL, FRONTAL)
_SLICE_NAMES = {"horizontal": HORIZONTAL, "lateral": LATERAL, "frontal": FRONTAL}


def as_tensor(data):
    """Validate and return an order-3 complex128 tensor.

    Rejects arrays that are not 3-dimensional, have an empty extent, or
    contain non-finite entries.
    """
    t = np.asarray(data, dtype=np.complex128)
    if t.ndim != 3:
        raise ValueError(f"expected an order-3 tensor, got ndim={t.ndim}")
    if t.size == 0:
        raise ValueError(f"empty tensor extent: shape={t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("tensor contains non-finite entries")
    return t


def _check3d(t):
    if t.ndim != 3 or t.size == 0:
        raise ValueError(f"expected a nonempty order-3 tensor, got shape={getattr(t, 'shape', None)}")


def _check_axis(axis):
    if axis not in _AXES:
        raise ValueError(f"axis must be 0, 1 or 2, got {axis!r}")


def fiber(t, j, k):
    """Return the axis-0 fiber t[:, j, k].  Indices must be in range."""
    _check3d(t)
    _, d1, d2 = t.shape
    if not (0 <= j < d1 and 0 <= k < d2):
        raise IndexError(f"fiber index ({j}, {k}) out of range for shape {t.shape}")
    return t[:, j, k]


def tensor_slice(t, kind, index):
    """Return a 2D slice of ``t``.

    ``kind`` is one of "horizontal", "lateral", "frontal" (or the axis
    constants 0/1/2 for the fixed axis).  Orientations are documented in the
    module docstring.
    """
    _check3d(t)
    axis = _SLICE_NAMES.get(kind, kind)
    _check_axis(axis)
    if not (0 <= index < t.shape[axis]):
        raise IndexError(f"slice index {index} out of range for axis {axis} of shape {t.shape}")
    if axis == HORIZONTAL:
        return t[index, :, :]
    if axis == LATERAL:
        return t[:, index, :]
    return t[:, :, index]


def matricize(t):
    """Stack all axis-0 fibers as columns of an (n_z, n_x * n_y) matrix.

    Column order is C order of the (j, k) index pair: k varies fastest.
    """
    _check3d(t)
    d0 = t.shape[0]
    return t.reshape(d0, -1)


def dematricize(m, dims):
    """Inverse of :func:`matricize` for the given tensor dims."""
    d0, d1, d2 = dims
    if m.shape != (d0, d1 * d2):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    return m.reshape(d0, d1, d2)


def fold(t, axis):
    """Matricize along one axis: columns are vectorized slices.

    ``fold(t, 0)`` has shape (n_x * n_y, n_z) and column i equal to
    ``t[i, :, :].ravel()``; analogously for axes 1 and 2.  The operation is a
    pure index permutation, so ``unfold(fold(t, a), t.shape, a)`` restores
    ``t`` bit-exactly.
    """
    _check3d(t)
    _check_axis(axis)
    d0, d1, d2 = t.shape
    if axis == 0:
        return t.reshape(d0, d1 * d2).T.copy()
    if axis == 1:
        return t.transpose(1, 0, 2).reshape(d1, d0 * d2).T.copy()
    return t.transpose(2, 0, 1).reshape(d2, d0 * d1).T.copy()


def unfold(m, dims, axis):
    """Rebuild an order-3 tensor from one of its :func:`fold` matrices."""
    _check_axis(axis)
    d0, d1, d2 = dims
    if min(dims) <= 0:
        raise ValueError(f"empty tensor extent: dims={dims}")
    expected = {0: (d1 * d2, d0), 1: (d0 * d2, d1), 2: (d0 * d1, d2)}[axis]
    if m.shape != expected:
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims} for axis {axis}")
    if axis == 0:
        return m.T.reshape(d0, d1, d2)
    if axis == 1:
        return m.T.reshape(d1, d0, d2).transpose(1, 0, 2)
    return m.T.reshape(d2, d0, d1).transpose(1, 2, 0)


def frobenius(t):
    """Frobenius norm."""
    return float(np.sqrt(np.sum(np.abs(t) ** 2)))


def l1(t):
    """Entrywise l1 norm (sum of moduli)."""
    return float(np.sum(np.abs(t)))


def inner(a, b):
    """Inner product sum(a * conj(b)); shapes must match."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.sum(a * np.conj(b)))


def hadamard(a, b):
    """Elementwise product; shapes must match."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a * b


def diff(t, axis):
    """First-order forward difference along ``axis`` with replicate boundary.

    out[n] = t[n + 1] - t[n] for n < N - 1, and the final plane is zero, so a
    constant tensor maps to zero and the operator has the same shape as its
    input.
    """
    _check3d(t)
    _check_axis(axis)
    n = t.shape[axis]
    if n == 1:
        return np.zeros_like(t)
    pad_shape = list(t.shape)
    pad_shape[axis] = 1
    return np.concatenate(
        [np.diff(t, axis=axis), np.zeros(pad_shape, dtype=t.dtype)], axis=axis
    )


def diff_adjoint(t, axis):
    """Adjoint of :func:`diff` along ``axis``.

    Satisfies inner(diff(x, a), y) == inner(x, diff_adjoint(y, a)) for all x,
    y of matching shape.
    """
    _check3d(t)
    _check_axis(axis)
    y = np.moveaxis(t, axis, 0)
    out = np.empty_like(y)
    n = y.shape[0]
    if n == 1:
        return np.zeros_like(t)
    out[0] = -y[0]
    if n > 2:
        out[1:-1] = y[:-2] - y[1:-1]
    out[-1] = y[-2]
    return np.moveaxis(out, 0, axis)


def tv_norm(t):
    """Anisotropic total variation: sum of l1 norms of the three axis diffs."""
    _check3d(t)
    return sum(l1(diff(t, axis)) for axis in _AXES)
