"""Sampled-field substrate: periodic grids, radial profiles, embedding, I/O.

Everything downstream (norms, propagators, experiment drivers) works on the
two containers defined here: scalar fields sampled on a periodic box
``[-L, L)^dim`` and one-dimensional radial profiles.  Fields are immutable
after construction; all operations return new objects.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

__all__ = [
    "TorusGrid",
    "ScalarField",
    "RadialProfile",
    "VectorField",
    "sample",
    "radial_embed",
    "integrate",
    "lattice_shift",
    "save_field",
    "load_field",
    "save_state",
    "load_state",
]

_MAGIC = b"WGF1"


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic lattice on ``[-L, L)^dim``.

    Parameters
    ----------
    dim : int
        Spatial dimension, one of {1, 2, 3}.
    half_width : float
        Half side length ``L``; the box is ``[-L, L)`` per axis.
    n : int
        Points per dimension; must be even and at least 8 so the Nyquist
        mode is unambiguous.
    """

    dim: int
    half_width: float
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be even and >= 8, got {self.n}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    def axis(self) -> np.ndarray:
        """Lattice coordinates along one axis: ``x_k = -L + k h``."""
        return -self.half_width + self.spacing * np.arange(self.n)

    def coords(self) -> tuple:
        """Meshgrid of coordinates, one array per dimension ('ij' order)."""
        ax = self.axis()
        return np.meshgrid(*([ax] * self.dim), indexing="ij")

    def radius(self) -> np.ndarray:
        """Distance to the origin at each lattice node."""
        r2 = sum(c * c for c in self.coords())
        return np.sqrt(r2)

    def wavenumbers(self) -> tuple:
        """Angular wavenumbers per axis matching ``numpy.fft.fftn`` layout."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)
        return np.meshgrid(*([k] * self.dim), indexing="ij")

    def wavenumber_magnitude(self) -> np.ndarray:
        k2 = sum(k * k for k in self.wavenumbers())
        return np.sqrt(k2)


@dataclass(frozen=True)
class ScalarField:
    """Real scalar field on a :class:`TorusGrid`, row-major values."""

    grid: TorusGrid
    values: np.ndarray
    time_stamp: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            bad = np.argwhere(~np.isfinite(v))[0]
            raise ValueError(f"non-finite value at lattice index {tuple(bad)}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values, time_stamp=None) -> "ScalarField":
        return ScalarField(self.grid, values, self.time_stamp if time_stamp is None else time_stamp)

    def __add__(self, other):
        self._check(other)
        return ScalarField(self.grid, self.values + other.values, self.time_stamp)

    def __sub__(self, other):
        self._check(other)
        return ScalarField(self.grid, self.values - other.values, self.time_stamp)

    def __mul__(self, c):
        if isinstance(c, ScalarField):
            self._check(c)
            return ScalarField(self.grid, self.values * c.values, self.time_stamp)
        return ScalarField(self.grid, self.values * float(c), self.time_stamp)

    __rmul__ = __mul__

    def _check(self, other):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")


@dataclass(frozen=True)
class VectorField:
    """Field with values in an ambient ``R^m``, stored per component."""

    grid: TorusGrid
    components: tuple

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=float) for c in self.components)
        if len(comps) < 2:
            raise ValueError("ambient dimension must be at least 2")
        for c in comps:
            if c.shape != self.grid.shape:
                raise ValueError("component shape does not match grid")
            if not np.all(np.isfinite(c)):
                raise ValueError("non-finite component value")
        comps = tuple(c.copy() for c in comps)
        for c in comps:
            c.setflags(write=False)
        object.__setattr__(self, "components", comps)

    @property
    def ambient_dim(self) -> int:
        return len(self.components)

    def magnitude(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.components))


@dataclass(frozen=True)
class RadialProfile:
    """Radial function sampled uniformly on ``[0, r_max]``.

    ``dim_hint`` records the ambient dimension used for volume weights when
    the profile stands in for a function on ``R^n``.  An optional exact
    callable can be attached for multi-scale profiles whose structure is
    finer than any reasonable uniform sampling; operations prefer it when
    present.
    """

    r_max: float
    samples: np.ndarray
    dim_hint: int = 2
    exact: object = dc_field(default=None, compare=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("samples must be a 1-d array with >= 2 entries")
        if not np.all(np.isfinite(s)):
            raise ValueError("non-finite profile sample")
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def radii(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.samples.size)

    def __call__(self, r) -> np.ndarray:
        """Evaluate at radii ``r``: the exact callable if attached, else
        linear interpolation of the samples (zero beyond ``r_max``)."""
        r = np.abs(np.asarray(r, dtype=float))
        if self.exact is not None:
            return np.asarray(self.exact(r), dtype=float)
        return np.interp(r, self.radii, self.samples, left=self.samples[0], right=0.0)

    @property
    def support_radius(self) -> float:
        nz = np.nonzero(self.samples)[0]
        if nz.size == 0:
            return 0.0
        step = self.r_max / (self.samples.size - 1)
        return min(self.r_max, (nz[-1] + 1) * step)

    @classmethod
    def from_callable(cls, f, r_max, n_samples=4096, dim_hint=2, keep_exact=True):
        r = np.linspace(0.0, r_max, n_samples)
        return cls(r_max, np.asarray(f(r), dtype=float), dim_hint,
                   exact=f if keep_exact else None)


def sample(f, grid: TorusGrid) -> ScalarField:
    """Evaluate ``f(x_1, ..., x_dim)`` at every lattice node.

    Raises with the offending node location if the function returns a
    non-finite value anywhere.
    """
    vals = np.asarray(f(*grid.coords()), dtype=float)
    if vals.shape != grid.shape:
        vals = np.broadcast_to(vals, grid.shape).copy()
    if not np.all(np.isfinite(vals)):
        idx = tuple(np.argwhere(~np.isfinite(vals))[0])
        pos = tuple(grid.axis()[i] for i in idx)
        raise ValueError(f"sampled function not finite at node {idx} (x = {pos})")
    return ScalarField(grid, vals)


def radial_embed(profile: RadialProfile, grid: TorusGrid) -> ScalarField:
    """Embed a radial profile as a scalar field, value = profile(|x|).

    The profile must either cover every lattice radius (``r_max >= L*sqrt(dim)``)
    or vanish beyond its sampled range; otherwise nodes outside the profile
    domain would silently read an extrapolated tail.
    """
    r = grid.radius()
    r_lattice = float(r.max())
    if profile.r_max < r_lattice and profile.support_radius >= profile.r_max - 1e-12:
        if profile.exact is None or np.any(np.asarray(profile.exact(r_lattice)) != 0.0):
            raise ValueError(
                f"profile domain [0, {profile.r_max}] does not cover lattice radius "
                f"{r_lattice:.3f} and has a nonzero tail")
    return ScalarField(grid, profile(r))


def integrate(f: ScalarField) -> float:
    """Rectangle-rule integral ``h^dim * sum(values)`` (exact on the torus
    for band-limited integrands)."""
    return float(f.grid.spacing ** f.grid.dim * np.sum(f.values))


def remove_lattice_mean(f: ScalarField) -> ScalarField:
    """Subtract the lattice mean.

    For a continuum-mean-zero function the rectangle-rule sum carries a
    sampling residue (the per-node correction is far below sampling error);
    removing it makes the discrete field satisfy the continuum identity
    exactly, so zero-mode-sensitive norms are well-defined."""
    return ScalarField(f.grid, f.values - float(np.mean(f.values)), f.time_stamp)


def lattice_shift(f: ScalarField, j) -> ScalarField:
    """Periodic shift by an integer lattice vector: ``g(x) = f(x + j*h)``.

    Exactly invertible: shifting by ``-j`` restores the field bit for bit.
    """
    j = np.atleast_1d(np.asarray(j, dtype=int))
    if j.size != f.grid.dim:
        raise ValueError(f"shift vector length {j.size} != dim {f.grid.dim}")
    vals = np.roll(f.values, shift=tuple(-j), axis=tuple(range(f.grid.dim)))
    return ScalarField(f.grid, vals, f.time_stamp)


# ---------------------------------------------------------------------------
# serialization: little-endian binary container plus a JSON mirror
# ---------------------------------------------------------------------------

def _header(grid: TorusGrid, time_stamp) -> bytes:
    t = np.nan if time_stamp is None else float(time_stamp)
    return _MAGIC + struct.pack("<4d", float(grid.dim), float(grid.n),
                                float(grid.half_width), t)


def save_field(f: ScalarField, path) -> None:
    """Write a field: ``.json`` paths get the sidecar mirror, anything else
    the binary container (header of four little-endian f64, then row-major
    f64 values)."""
    path = Path(path)
    if path.suffix == ".json":
        doc = {"dim": f.grid.dim, "n": f.grid.n, "half_width": f.grid.half_width,
               "time_stamp": f.time_stamp,
               "values": f.values.ravel().tolist()}
        path.write_text(json.dumps(doc))
        return
    with open(path, "wb") as fh:
        fh.write(_header(f.grid, f.time_stamp))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_field(path) -> ScalarField:
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        grid = TorusGrid(int(doc["dim"]), float(doc["half_width"]), int(doc["n"]))
        vals = np.asarray(doc["values"], dtype=float).reshape(grid.shape)
        return ScalarField(grid, vals, doc.get("time_stamp"))
    raw = path.read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not a field container")
    dim, n, half_width, t = struct.unpack("<4d", raw[4:36])
    grid = TorusGrid(int(dim), half_width, int(n))
    count = grid.n ** grid.dim
    vals = np.frombuffer(raw[36:36 + 8 * count], dtype="<f8").reshape(grid.shape)
    return ScalarField(grid, vals, None if np.isnan(t) else t)


def save_state(u: ScalarField, ut: ScalarField, t: float, path) -> None:
    """Binary container for a (value, time-derivative) pair at time ``t``."""
    if u.grid != ut.grid:
        raise ValueError("state components live on different grids")
    with open(path, "wb") as fh:
        fh.write(_header(u.grid, t))
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(ut.values, dtype="<f8").tobytes())


def load_state(path):
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not a state container")
    dim, n, half_width, t = struct.unpack("<4d", raw[4:36])
    grid = TorusGrid(int(dim), half_width, int(n))
    count = grid.n ** grid.dim
    u = np.frombuffer(raw[36:36 + 8 * count], dtype="<f8").reshape(grid.shape)
    ut = np.frombuffer(raw[36 + 8 * count:36 + 16 * count], dtype="<f8").reshape(grid.shape)
    return ScalarField(grid, u, t), ScalarField(grid, ut, t), float(t)
