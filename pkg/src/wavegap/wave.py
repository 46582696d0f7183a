"""Linear wave propagation: exact spectral evolution on the torus, the
planar singular-kernel point value, and the dimension-specific radial
representation formulas with calibrated constants.

Point-value conventions: every evaluator in this module returns the value of
the solution of the Cauchy problem ``z_tt = Laplace z, z(0) = 0,
z_t(0) = datum`` as a function on R^n.  Closed-form references that are
stated in the bare radial measure (without the angular factor) live in
:mod:`wavegap.construct`; the planar solution carries the angular factor
``2 pi`` relative to those.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .field import RadialProfile, ScalarField
from .norms import sobolev_norm
from .radial import gauss_panel_nodes, gaussian_origin_value

__all__ = [
    "WaveState",
    "spectral_propagate",
    "energy",
    "spectral_laplacian",
    "spectral_gradient",
    "spectral_dt_of_solution",
    "kernel_solution_2d",
    "radial_even_representation",
    "kirchhoff_3d_origin",
    "odd_n_boundary_value",
    "representation_constants",
    "calibrate_representation_constants",
]

_CALIBRATION_FILE = Path(__file__).with_name("_calibration.json")
_CALIBRATION_GAUSSIANS = (0.5, 0.8, 1.2, 1.8, 2.5)
_RESIDUAL_LIMITS = {2: 1e-6, 3: 1e-6, 4: 1e-4, 5: 1e-4}


@dataclass(frozen=True)
class WaveState:
    """Pair (u, u_t) at a time stamp; what the propagators evolve."""

    u: ScalarField
    ut: ScalarField
    t: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.ut.grid:
            raise ValueError("u and ut live on different grids")

    @property
    def grid(self):
        return self.u.grid


def _multipliers(grid, tau):
    K = grid.wavenumber_magnitude()
    ck = np.cos(tau * K)
    sk = np.sin(tau * K)
    with np.errstate(divide="ignore", invalid="ignore"):
        sinc = np.where(K > 0, sk / np.where(K > 0, K, 1.0), tau)
    return K, ck, sk, sinc


def spectral_propagate(state: WaveState, t_target: float) -> WaveState:
    """Evolve a free-wave state to ``t_target`` by the exact Fourier
    multiplier (forward or backward; exact in time up to roundoff):

        uhat(t) = cos(tau k) uhat0 + sin(tau k)/k vhat0,
        vhat(t) = -k sin(tau k) uhat0 + cos(tau k) vhat0,

    with the zero mode evolving linearly, ``uhat0 + tau vhat0``.
    """
    tau = float(t_target) - state.t
    grid = state.grid
    K, ck, sk, sinc = _multipliers(grid, tau)
    U0 = np.fft.fftn(state.u.values)
    V0 = np.fft.fftn(state.ut.values)
    U = ck * U0 + sinc * V0
    V = -K * sk * U0 + ck * V0
    u = ScalarField(grid, np.fft.ifftn(U).real, t_target)
    ut = ScalarField(grid, np.fft.ifftn(V).real, t_target)
    return WaveState(u, ut, float(t_target))


def energy(state: WaveState, s: float) -> float:
    """Homogeneous wave energy at order ``s``:
    ``sqrt(|u|_{H^s}^2 + |u_t|_{H^(s-1)}^2)`` (dot norms); conserved exactly
    by :func:`spectral_propagate` mode by mode."""
    a = sobolev_norm(state.u, s, homogeneous=True)
    b = sobolev_norm(state.ut, s - 1.0, homogeneous=True)
    return math.hypot(a, b)


def spectral_laplacian(f: ScalarField) -> ScalarField:
    K = f.grid.wavenumber_magnitude()
    vals = np.fft.ifftn(-(K * K) * np.fft.fftn(f.values)).real
    return ScalarField(f.grid, vals, f.time_stamp)


def spectral_gradient(f: ScalarField):
    F = np.fft.fftn(f.values)
    out = []
    for k_axis in f.grid.wavenumbers():
        out.append(ScalarField(f.grid, np.fft.ifftn(1j * k_axis * F).real, f.time_stamp))
    return tuple(out)


def spectral_dt_of_solution(state: WaveState) -> ScalarField:
    """Exact second derivative in time of the evolved solution at the
    state's own time (= Laplacian of u for a free wave)."""
    return spectral_laplacian(state.u)


# ---------------------------------------------------------------------------
# planar singular-kernel point value
# ---------------------------------------------------------------------------

def kernel_solution_2d(psi, t: float, x=0.0, tol: float = 1e-8,
                       breakpoints=(), max_refine: int = 9):
    """Point value of the planar solution with data ``(0, psi(|.|))``:

        z(t, x) = (1/(2 pi)) int_{|x-y|<=t} psi(|y|) / sqrt(t^2-|x-y|^2) dy.

    The substitution ``rho = t sin(theta)`` removes the square-root
    singularity at the rim; the result is a smooth double quadrature
    refined until two successive refinements agree to ``tol``.

    Raises if the refinement loop fails to converge (with the achieved
    error estimate in the message).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    prof = psi if callable(psi) else psi.__call__
    if isinstance(psi, RadialProfile) and not breakpoints:
        breakpoints = (psi.support_radius,)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r0 = float(np.sqrt(np.sum(x * x)))

    def theta_edges(n_extra):
        edges = {0.0, math.pi / 2.0}
        if r0 == 0.0:
            for b in breakpoints:
                if 0 < b < t:
                    edges.add(math.asin(b / t))
        for v in np.linspace(0.0, math.pi / 2.0, n_extra):
            edges.add(float(v))
        return np.asarray(sorted(edges))

    def evaluate(n_theta, n_alpha):
        th, wth = gauss_panel_nodes(theta_edges(n_theta), 12)
        rho = t * np.sin(th)
        if r0 == 0.0:
            vals = prof(rho)
            return float(t * np.sum(wth * np.sin(th) * vals))
        alpha = 2.0 * math.pi * np.arange(n_alpha) / n_alpha
        ca = np.cos(alpha)
        dist = np.sqrt(np.maximum(r0 * r0 + rho[:, None] ** 2
                                  + 2.0 * r0 * rho[:, None] * ca[None, :], 0.0))
        vals = prof(dist.ravel()).reshape(dist.shape)
        angular = vals.mean(axis=1)
        return float(t * np.sum(wth * np.sin(th) * angular))

    prev = evaluate(9, 32)
    n_theta, n_alpha = 17, 64
    for _ in range(max_refine):
        cur = evaluate(n_theta, n_alpha)
        err = abs(cur - prev)
        if err <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
        n_theta = 2 * n_theta - 1
        n_alpha *= 2
    raise RuntimeError(
        f"kernel quadrature did not converge: last refinement changed by {err:.3e}")


# ---------------------------------------------------------------------------
# radial representation formulas with calibrated constants
# ---------------------------------------------------------------------------

def _derivative_of(profile, order):
    """Radial derivative of a profile as a callable (analytic when the
    profile carries one, else a centered stencil on the exact callable)."""
    if order == 0:
        return profile if callable(profile) else profile.__call__
    base = _derivative_of(profile, order - 1)
    step = 1e-5

    def deriv(r):
        r = np.asarray(r, dtype=float)
        return (np.asarray(base(r + step)) - np.asarray(base(np.maximum(r - step, 0.0)))) / (
            np.where(r - step < 0, r + step, 2 * step))

    return deriv


def _even_moment(profile, nu, n, breakpoints=()):
    """``int_0^1 d_r^nu phi(r) (1-r^2)^(-1/2) r^(nu+n-1) dr`` via
    ``r = sin(theta)``."""
    d = _derivative_of(profile, nu)
    edges = {0.0, math.pi / 2.0}
    for b in breakpoints:
        if 0 < b < 1:
            edges.add(math.asin(b))
    for v in np.linspace(0, math.pi / 2, 33):
        edges.add(float(v))
    th, w = gauss_panel_nodes(np.asarray(sorted(edges)), 16)
    s = np.sin(th)
    return float(np.sum(w * np.asarray(d(s)) * s ** (nu + n - 1)))


def _load_constants():
    if _CALIBRATION_FILE.exists():
        return {int(k): v for k, v in json.loads(_CALIBRATION_FILE.read_text()).items()}
    return calibrate_representation_constants(write=True)


_constants_cache: dict = {}


def representation_constants(n: int):
    """Calibrated coefficients of the dimension-``n`` origin-value formula,
    with the recorded calibration residual."""
    if not _constants_cache:
        _constants_cache.update(_load_constants())
    if n not in _constants_cache:
        raise ValueError(f"no representation constants for n={n}")
    entry = _constants_cache[n]
    if entry["residual"] > _RESIDUAL_LIMITS[n]:
        raise RuntimeError(
            f"calibration residual {entry['residual']:.2e} for n={n} exceeds "
            f"{_RESIDUAL_LIMITS[n]:.0e}")
    return entry


def calibrate_representation_constants(write: bool = False) -> dict:
    """Fit the unspecified constants of the radial origin-value formulas by
    least squares against the Gaussian Fourier oracle, for n in {2, 3, 4, 5}.

    The fitted values are rationally simple (1 for n in {2, 3}; the n = 5
    boundary formula is ``phi(1) + phi'(1)/3``) but are always derived from
    the oracle rather than transcribed.
    """
    out = {}
    for n in (2, 4):
        nus = list(range((n - 2) // 2 + 1))
        rows, rhs = [], []
        for a in _CALIBRATION_GAUSSIANS:
            prof = _gaussian_profile(a)
            rows.append([_even_moment(prof, nu, n) for nu in nus])
            rhs.append(gaussian_origin_value(a, 1.0, n))
        A, b = np.asarray(rows), np.asarray(rhs)
        coef, *_ = np.linalg.lstsq(A, b, rcond=None)
        resid = float(np.max(np.abs(A @ coef - b)) / np.max(np.abs(b)))
        out[n] = {"coefficients": list(map(float, coef)), "residual": resid,
                  "oracle": "gaussian-fourier", "gaussians": list(_CALIBRATION_GAUSSIANS)}
    for n in (3, 5):
        nus = list(range((n - 3) // 2 + 1))
        rows, rhs = [], []
        for a in _CALIBRATION_GAUSSIANS:
            rows.append([_gaussian_boundary_derivative(a, nu) for nu in nus])
            rhs.append(gaussian_origin_value(a, 1.0, n))
        A, b = np.asarray(rows), np.asarray(rhs)
        coef, *_ = np.linalg.lstsq(A, b, rcond=None)
        resid = float(np.max(np.abs(A @ coef - b)) / np.max(np.abs(b)))
        out[n] = {"coefficients": list(map(float, coef)), "residual": resid,
                  "oracle": "gaussian-fourier", "gaussians": list(_CALIBRATION_GAUSSIANS)}
    if write:
        _CALIBRATION_FILE.write_text(json.dumps(out, indent=1))
    return out


def _gaussian_profile(a):
    return lambda r: np.exp(-a * np.asarray(r, dtype=float) ** 2)


def _gaussian_boundary_derivative(a, nu):
    """nu-th radial derivative of exp(-a r^2) at r = 1 (analytic)."""
    if nu == 0:
        return math.exp(-a)
    if nu == 1:
        return -2.0 * a * math.exp(-a)
    if nu == 2:
        return (4.0 * a * a - 2.0 * a) * math.exp(-a)
    raise ValueError("nu too large")


def radial_even_representation(profile, n: int, breakpoints=()) -> float:
    """Origin value z(1, 0) in even dimension n from the radial moment
    formula ``sum_nu c_nu int_0^1 d_r^nu phi (1-r^2)^(-1/2) r^(nu+n-1) dr``
    with calibrated ``c_nu``."""
    if n not in (2, 4):
        raise ValueError("even representation implemented for n in {2, 4}")
    entry = representation_constants(n)
    if isinstance(profile, RadialProfile) and not breakpoints:
        breakpoints = (profile.support_radius,)
    coef = entry["coefficients"]
    return float(sum(c * _even_moment(profile, nu, n, breakpoints)
                     for nu, c in enumerate(coef)))


def kirchhoff_3d_origin(profile) -> float:
    """Origin value z(1, 0) in three dimensions: the spherical mean of the
    radial velocity datum over the unit sphere is its value at radius 1."""
    if isinstance(profile, RadialProfile):
        if profile.dim_hint != 3:
            raise ValueError("profile dim_hint must be 3")
        if profile.r_max < 1.0:
            raise ValueError("radius 1 outside profile domain")
        return float(profile(1.0))
    return float(np.asarray(profile(np.asarray([1.0])))[0])


def odd_n_boundary_value(profile, n: int) -> float:
    """Origin value z(1, 0) in odd dimension n from boundary derivatives:
    ``sum_nu b_nu d_r^nu phi(1)`` with calibrated ``b_nu`` (Kirchhoff for
    n = 3)."""
    if n not in (3, 5):
        raise ValueError("odd boundary formula implemented for n in {3, 5}")
    entry = representation_constants(n)
    coef = entry["coefficients"]
    total = 0.0
    for nu, c in enumerate(coef):
        d = _derivative_of(profile, nu)
        total += c * float(np.asarray(d(np.asarray([1.0])))[0])
    return float(total)
