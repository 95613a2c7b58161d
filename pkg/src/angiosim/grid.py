"""Uniform grid on the bounding square of a disk, with masked field storage.

Index convention: ``values[i, j]`` lives at ``((k - i) h, (k - j) h)``, so
index 0 is the +R edge on both axes and index k is the origin.  Nodes with
|x| > R are inactive: their stored value is always 0 and numerics never
read them.  Edges joining an active node to an inactive one carry zero
flux, which closes the no-flux boundary in a finite-volume sense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class Grid:
    def __init__(self, h: float, R: float = 500.0):
        k = R / h
        if abs(k - round(k)) > 1e-9 or round(k) < 1:
            raise ValueError(f"h={h} does not divide R={R}")
        self.h = float(h)
        self.R = float(R)
        self.k = int(round(k))
        self.n = 2 * self.k + 1
        self.axis = (self.k - np.arange(self.n)) * self.h  # coordinate along either index
        self.xs = self.axis[:, None]  # x of node (i, j)
        self.ys = self.axis[None, :]  # y of node (i, j)
        self.mask = self.xs**2 + self.ys**2 <= self.R**2  # boundary nodes included

    @classmethod
    def full_square(cls, n: int, h: float) -> "Grid":
        """An n-by-n grid with every node active (no disk mask); test harness use."""
        grid = cls.__new__(cls)
        grid.h = float(h)
        grid.R = None
        grid.k = None
        grid.n = int(n)
        grid.axis = ((n - 1) / 2.0 - np.arange(n)) * h
        grid.xs = grid.axis[:, None]
        grid.ys = grid.axis[None, :]
        grid.mask = np.ones((n, n), dtype=bool)
        return grid

    @property
    def active_count(self) -> int:
        return int(self.mask.sum())

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Boolean: which points lie in the closed domain."""
        pts = np.asarray(pts, dtype=float)
        if self.R is None:
            lim = abs(self.axis[0])
            return (np.abs(pts[..., 0]) <= lim) & (np.abs(pts[..., 1]) <= lim)
        return np.hypot(pts[..., 0], pts[..., 1]) <= self.R

    def __eq__(self, other):
        return (isinstance(other, Grid) and self.h == other.h
                and self.R == other.R and self.n == other.n)

    def __hash__(self):
        return hash((self.h, self.R, self.n))


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray  # (n, n) float64, row-major; inactive entries stay 0

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros((grid.n, grid.n)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        """Evaluate fn(x, y) (vectorized) at nodes; inactive nodes forced to 0."""
        values = np.where(grid.mask, fn(grid.xs, grid.ys), 0.0)
        return cls(grid, np.ascontiguousarray(values, dtype=float))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def integrate(field: ScalarField) -> float:
    """h^2 times the sum over active nodes."""
    return float(field.grid.h**2 * np.sum(field.values, where=field.grid.mask))


def _bilinear_pieces(grid: Grid, pts: np.ndarray):
    """Corner indices and mask-renormalized bilinear weights for each point.

    Every bilinear cell touching the closed disk has at least one active
    corner (the one toward the origin), so the weight renormalization is
    always well defined for in-domain points.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if not np.all(grid.contains(pts)):
        bad = pts[~grid.contains(pts)][0]
        raise ValueError(f"point {tuple(bad)} lies outside the domain")
    ref = grid.axis[0]  # +R edge; index grows as the coordinate falls
    fi = (ref - pts[:, 0]) / grid.h
    fj = (ref - pts[:, 1]) / grid.h
    i0 = np.clip(np.floor(fi).astype(int), 0, grid.n - 2)
    j0 = np.clip(np.floor(fj).astype(int), 0, grid.n - 2)
    t = fi - i0
    s = fj - j0
    w = np.empty((len(pts), 4))
    w[:, 0] = (1 - t) * (1 - s)
    w[:, 1] = (1 - t) * s
    w[:, 2] = t * (1 - s)
    w[:, 3] = t * s
    ii = np.stack([i0, i0, i0 + 1, i0 + 1], axis=1)
    jj = np.stack([j0, j0 + 1, j0, j0 + 1], axis=1)
    w = w * grid.mask[ii, jj]
    total = w.sum(axis=1)
    w /= total[:, None]
    return ii, jj, w


def interpolate_at(field: ScalarField, p) -> float | np.ndarray:
    """Bilinear interpolation at p ((2,) or (N, 2)); inactive corners get zero weight."""
    single = np.asarray(p).ndim == 1
    ii, jj, w = _bilinear_pieces(field.grid, p)
    out = (field.values[ii, jj] * w).sum(axis=1)
    return float(out[0]) if single else out


def node_gradients(field: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """Per-node (d/dx, d/dy): central differences, one-sided against the mask.

    Index i-1 sits at x+h, so d/dx uses (value[i-1] - value[i+1]) / 2h.
    Inactive nodes report zero.
    """
    grid = field.grid

    def _axis_deriv(values, mask, axis):
        h = grid.h
        lo = np.roll(values, 1, axis=axis)    # neighbor at coordinate +h
        hi = np.roll(values, -1, axis=axis)   # neighbor at coordinate -h
        has_lo = np.roll(mask, 1, axis=axis)
        has_hi = np.roll(mask, -1, axis=axis)
        # roll wraps around; the wrapped rows are not real neighbors
        first = [slice(None)] * values.ndim
        last = [slice(None)] * values.ndim
        first[axis] = 0
        last[axis] = -1
        has_lo[tuple(first)] = False
        has_hi[tuple(last)] = False
        central = has_lo & has_hi
        only_lo = has_lo & ~has_hi
        only_hi = has_hi & ~has_lo
        out = np.zeros_like(values)
        out[central] = (lo[central] - hi[central]) / (2 * h)
        out[only_lo] = (lo[only_lo] - values[only_lo]) / h
        out[only_hi] = (values[only_hi] - hi[only_hi]) / h
        return np.where(mask, out, 0.0)

    gx = _axis_deriv(field.values, grid.mask, axis=0)
    gy = _axis_deriv(field.values, grid.mask, axis=1)
    return gx, gy


def gradient_at(field: ScalarField, p, grads=None) -> np.ndarray:
    """Gradient at p ((2,) or (N, 2)) via node gradients + bilinear interpolation.

    `grads` can pass precomputed node_gradients(field) to amortize the cost
    over many query points.
    """
    single = np.asarray(p).ndim == 1
    gx, gy = grads if grads is not None else node_gradients(field)
    ii, jj, w = _bilinear_pieces(field.grid, p)
    out = np.stack([(gx[ii, jj] * w).sum(axis=1),
                    (gy[ii, jj] * w).sum(axis=1)], axis=-1)
    return out[0] if single else out
