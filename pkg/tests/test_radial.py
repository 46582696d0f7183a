import math

import numpy as np
import pytest
from scipy import integrate as sint
from scipy.special import j0

from wavegap.construct import LogCutoffAtom, delta_family, shell_wave
from wavegap.field import TorusGrid
from wavegap.radial import (RadialWave2D, fourier_hs_sq_radial_3d,
                            gauss_panel_nodes, gaussian_origin_value,
                            h_half_sq_radial_3d, h_half_sq_shell_3d,
                            l2_radial_measure, l2_sq_radial_3d,
                            l2_sq_shell_3d, odd3_origin_value, odd3_value,
                            smooth_step, smooth_step_d, sphere_area)


def test_gauss_panels_integrate_polynomial():
    x, w = gauss_panel_nodes(np.linspace(0, 2, 5), order=8)
    assert abs(np.sum(w * x ** 7) - 2.0 ** 8 / 8.0) < 1e-12


def test_smooth_step_properties():
    x = np.linspace(-0.5, 1.5, 101)
    s = smooth_step(x)
    assert np.all(s[x <= 0] == 0.0) and np.all(s[x >= 1] == 1.0)
    assert np.all(np.diff(s[(x > 0) & (x < 1)]) > 0)
    # derivative consistency
    h = 1e-6
    mid = np.linspace(0.1, 0.9, 17)
    fd = (smooth_step(mid + h) - smooth_step(mid - h)) / (2 * h)
    assert np.max(np.abs(fd - smooth_step_d(mid))) < 1e-6


def test_sphere_area_values():
    assert abs(sphere_area(2) - 2 * math.pi) < 1e-14
    assert abs(sphere_area(3) - 4 * math.pi) < 1e-14


@pytest.fixture(scope="module")
def gauss_wave():
    # table interpolation error falls quadratically with node spacing
    return RadialWave2D(lambda r: np.exp(-r * r), support=10.0,
                        s_table=np.linspace(0, 10, 20000),
                        psi_prime=lambda r: -2 * r * np.exp(-r * r))


def test_wave2d_against_hankel_oracle(gauss_wave):
    for (t, r) in [(1.0, 0.0), (0.5, 0.3), (1.0, 1.2), (0.25, 2.0)]:
        def f(k):
            return np.sin(t * k) * (np.pi) * np.exp(-k * k / 4.0) * j0(k * r) / (2 * np.pi)
        oracle, _ = sint.quad(f, 0, 60, limit=400)
        assert abs(gauss_wave.value(t, r) - oracle) < 5e-7


def test_wave2d_origin_matches_gaussian_formula(gauss_wave):
    assert abs(gauss_wave.value(1.0, 0.0) - gaussian_origin_value(1.0, 1.0, 2)) < 5e-7


def test_wave2d_dt_matches_finite_difference(gauss_wave):
    t, r = 0.7, 0.4
    h = 1e-5
    fd = (gauss_wave.value(t + h, r) - gauss_wave.value(t - h, r)) / (2 * h)
    # limited by linear interpolation of the derivative table
    assert abs(gauss_wave.dt_value(t, r) - fd) < 5e-4


def test_wave2d_initial_velocity_norm(gauss_wave):
    # z_t(0, .) is the datum itself
    a = gauss_wave.l2_planar(1e-9, derivative=True)
    b = gauss_wave.datum_l2_planar()
    assert abs(a / b - 1.0) < 1e-5


def test_wave2d_energy_monotonicity(gauss_wave):
    datum = gauss_wave.datum_l2_planar()
    for t in (0.3, 0.7, 1.0):
        assert gauss_wave.l2_planar(t, derivative=True) <= datum * (1 + 1e-6)


def test_shell_wave_cross_validated_against_fft():
    fam = delta_family(0.3)
    wave = shell_wave(fam, smooth=True)
    g = TorusGrid(2, 4.0, 2048)
    ut0 = radial_embed_from(wave, g)
    z = propagate_fft(ut0, 4.0, 0.7)
    i0 = g.n // 2
    for ridx in (0, 128, 512):
        r = abs(g.axis()[i0 + ridx])
        assert abs(wave.value(0.7, r) - z[i0 + ridx, i0]) < 5e-5


def radial_embed_from(wave, grid):
    r = grid.radius()
    return wave.psi(r)


def propagate_fft(ut0, L, t):
    n = ut0.shape[0]
    k1 = 2 * np.pi * np.fft.fftfreq(n, d=2 * L / n)
    KX, KY = np.meshgrid(k1, k1, indexing="ij")
    K = np.sqrt(KX ** 2 + KY ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        sinc = np.where(K > 0, np.sin(t * K) / np.where(K > 0, K, 1.0), t)
    return np.fft.ifft2(sinc * np.fft.fft2(ut0)).real


def test_l2_radial_measure_annulus_closed_form():
    fam = delta_family(0.1)
    from wavegap.construct import annulus_l2sq_radial, psi_exact
    prof = psi_exact(fam)
    val = l2_radial_measure(prof.exact, [fam.p, fam.q], order=48)
    assert abs(2 * val ** 2 / annulus_l2sq_radial(fam) - 1.0) < 1e-10


def test_odd3_formulas():
    phi = lambda r: np.exp(-np.asarray(r, float) ** 2)
    assert abs(odd3_origin_value(phi, 1.0) - math.exp(-1.0)) < 1e-14
    assert abs(odd3_origin_value(phi, 1.0) - gaussian_origin_value(1.0, 1.0, 3)) < 1e-10
    # interior value via the 1-d reduction against a second quadrature
    t, r = 0.6, 0.8
    direct = sint.quad(lambda s: s * math.exp(-s * s), r - t, r + t)[0] / (2 * r)
    assert abs(odd3_value(phi, t, r, support=8.0) - direct) < 1e-12


def test_gagliardo_gaussian_matches_fourier():
    u = lambda r: np.exp(-np.asarray(r, float) ** 2)
    up = lambda r: -2 * np.asarray(r, float) * np.exp(-np.asarray(r, float) ** 2)
    hg = h_half_sq_radial_3d(u, np.linspace(1e-9, 8, 80), u_prime=up)
    assert abs(hg / math.pi - 1.0) < 1e-6  # exact value is pi
    hf = fourier_hs_sq_radial_3d(u, np.linspace(0, 8, 60), 0.5, k_max=60)
    assert abs(hf / math.pi - 1.0) < 1e-8
    l2 = l2_sq_radial_3d(u, np.linspace(1e-9, 8, 40))
    assert abs(l2 - 4 * math.pi * sint.quad(lambda r: r * r * math.exp(-2 * r * r), 0, 8)[0]) < 1e-10


def test_shell_gagliardo_matches_plain_coordinates():
    atom = LogCutoffAtom(0)  # representable plateau: both routes apply
    hs_shell = h_half_sq_shell_3d(atom.T_logd, atom.dT_logd, atom.l_plateau)
    hs_plain = h_half_sq_radial_3d(atom, atom.radial_panel_edges(),
                                   u_prime=atom.derivative)
    assert abs(hs_shell / hs_plain - 1.0) < 5e-4
    l2_shell = l2_sq_shell_3d(atom.T_logd, atom.l_plateau)
    l2_plain = l2_sq_radial_3d(atom, atom.radial_panel_edges())
    assert abs(l2_shell / l2_plain - 1.0) < 1e-10


def test_strip_max_finds_synthetic_peak(gauss_wave):
    m, tj, rj = gauss_wave.strip_max(t_step=1.0 / 64.0)
    # brute scan oracle on a fine grid
    best = 0.0
    for t in np.linspace(0.05, 1.0, 96):
        vals = np.abs(gauss_wave.value(t, np.linspace(0, 3, 200)))
        best = max(best, vals.max())
    assert m >= best * 0.999


def test_half_level_radius_cosine():
    class Fake:
        pass
    # z(t, r) = cos(r): level 1/2 crossed exactly at pi/3
    from wavegap.construct import _half_level_radius
    r = _half_level_radius(lambda t, rr: np.cos(np.asarray(rr)), 0.5, 0.5,
                           r_top=3.0, fine=1e-6)
    assert abs(r - math.pi / 3.0) < 1e-6
