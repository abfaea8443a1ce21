# SPDX-License-Identifier: Apache-2.0
"""Smoke tests of the Python module against independent numpy/scipy/cvxpy references."""

import json
import math

import numpy as np
import pytest

import nfkit


def coordinate_response(N, d, ref, lam, theta, r):
    x = (np.arange(N) - ref) * d
    dist = np.hypot(r * np.sin(theta) - x, r * np.cos(theta))
    return np.exp(-2j * np.pi / lam * (dist - r))


def test_region_arithmetic():
    g = nfkit.ArrayGeometry.from_wavelength(101, 0.01, 0.01)
    rb = nfkit.region_boundaries(g)
    assert rb.fraunhofer == 200.0
    assert abs(rb.reactive_limit - 0.62 * math.sqrt(1.0 / 0.01)) < 1e-12
    assert nfkit.classify_range(g, 100.0) == nfkit.FieldRegion.RADIATIVE_NF
    assert nfkit.classify_range(g, 1e4) == nfkit.FieldRegion.FAR_FIELD


def test_exact_steering_matches_coordinates():
    g = nfkit.ArrayGeometry.half_wavelength(33, 30e9).centered()
    a = nfkit.steering(g, 0.4, 2.0, nfkit.SteeringModel.EXACT)
    ref = coordinate_response(33, g.spacing, g.phase_reference, g.wavelength, 0.4, 2.0)
    assert np.max(np.abs(a - ref)) < 1e-9


def test_fresnel_integrals_against_scipy():
    special = pytest.importorskip("scipy.special")
    for z in (0.1, 0.8, 1.6, 3.0):
        s, c = special.fresnel(z)
        cc, ss = nfkit.fresnel_integrals(z)
        assert abs(cc - c) < 1e-10 and abs(ss - s) < 1e-10


def test_music_recovers_a_noiseless_source():
    g = nfkit.ArrayGeometry.half_wavelength(32, 30e9).centered()
    dF = nfkit.region_boundaries(g).fraunhofer
    theta, r = math.radians(12.0), 0.3 * dF
    Y = nfkit.synthesize(g, [(theta, r, 1.0, nfkit.Waveform.GAUSSIAN)], 200, float("inf"), 3)
    R = Y @ Y.conj().T / Y.shape[1]
    assert np.allclose(R, nfkit.sample_covariance(Y))
    thetas = np.radians(np.arange(-60.0, 60.5, 0.5))
    ranges = np.linspace(0.1 * dF, 0.6 * dF, 80)
    values, peaks = nfkit.music_2d(R, g, 1, thetas, ranges)
    assert values.shape == (len(thetas), len(ranges))
    (th_hat, r_hat), = peaks
    assert abs(th_hat - theta) < math.radians(0.1)
    assert abs(r_hat - r) / r < 0.02


def test_qpsk_cumulant_is_rank_one():
    g = nfkit.ArrayGeometry.half_wavelength(9, 30e9).centered()
    theta = math.radians(20.0)
    Y = nfkit.synthesize(g, [(theta, float("inf"), 1.0, nfkit.Waveform.QPSK)], 20000, float("inf"), 5)
    C = nfkit.cumulant_c1(Y)
    w = 2 * np.pi * g.spacing * np.sin(theta) / g.wavelength
    b = np.exp(2j * np.arange(-4, 5) * w)
    assert np.linalg.norm(C + np.outer(b, b.conj())) / np.linalg.norm(np.outer(b, b)) < 0.05


def test_fbss_restores_rank():
    g = nfkit.ArrayGeometry.half_wavelength(16, 30e9)
    a = nfkit.steering(g, -0.3, float("inf"), nfkit.SteeringModel.PLANAR)
    b = nfkit.steering(g, 0.4, float("inf"), nfkit.SteeringModel.PLANAR)
    rng = np.random.default_rng(1)
    s = rng.standard_normal(300) + 1j * rng.standard_normal(300)
    Y = np.outer(a + (0.6 - 0.2j) * b, s)
    assert nfkit.numerical_rank(nfkit.sample_covariance(Y)) == 1
    assert nfkit.numerical_rank(nfkit.fbss(Y, 12, 2)) == 2


def test_beam_depth_closed_form():
    g = nfkit.ArrayGeometry.half_wavelength(512, 30e9).centered()
    N, d, lam = 512, g.spacing, g.wavelength
    rbd_ref = N**2 * d**2 / (2 * lam * nfkit.z_3db() ** 2)
    rbd, bd = nfkit.beam_depth(g, math.pi / 2, 20.0)
    assert abs(rbd - rbd_ref) < 1e-9 * rbd_ref
    assert abs(bd - 2 * 20.0**2 * rbd / (rbd**2 - 20.0**2)) < 1e-9 * bd
    assert math.isinf(nfkit.beam_depth(g, math.pi / 2, rbd)[1])


def test_squint_deviation_formula():
    for vt, r, eta in [(0.3, 5.0, 0.95), (0.8, 1.0, 1.05)]:
        dt, dr = nfkit.squint_deviation(vt, r, eta)
        assert abs(dt - (eta - 1) * vt) < 1e-14
        assert abs(dr - r * ((1 - eta**2 * vt**2) / (eta * (1 - vt**2)) - 1)) < 1e-12
    assert nfkit.squint_deviation(0.5, 3.0, 1.0) == (0.0, 0.0)


def test_mvdr_against_closed_form():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((8, 40)) + 1j * rng.standard_normal((8, 40))
    R = X @ X.conj().T / 40
    a = np.exp(1j * rng.uniform(0, 2 * np.pi, 8))
    w = nfkit.mvdr_weights(R, a)
    ref = np.linalg.solve(R, a)
    ref /= a.conj() @ ref
    assert np.allclose(w, ref, atol=1e-10)


def test_sidelobe_design_matches_cvxpy():
    cp = pytest.importorskip("cvxpy")
    c, f = 1540.0, 3e6
    lam = c / f
    N, zf, delta = 32, 0.04, 0.1
    yf = nfkit.point_response(N, lam / 2, [0.0, 0.0, zf], lam)
    angles = np.radians(np.concatenate([-np.linspace(4, 40, 25), np.linspace(4, 40, 25)]))
    Y = np.stack([nfkit.point_response(N, lam / 2, [zf * np.sin(a), 0.0, zf * np.cos(a)], lam) for a in angles], 1)
    w, feasible = nfkit.sidelobe_design(yf, Y, delta)
    assert feasible
    assert np.max(np.abs(Y.conj().T @ w)) <= delta + 1e-4
    assert abs(np.vdot(w, yf) - 1) < 1e-8
    v = cp.Variable(N, complex=True)
    prob = cp.Problem(cp.Minimize(cp.norm(v)), [yf.conj() @ v == 1, cp.abs(Y.conj().T @ v) <= delta])
    prob.solve()
    assert prob.status in ("optimal", "optimal_inaccurate")
    assert abs(np.linalg.norm(w) - prob.value) <= 0.01 * prob.value


def test_wigner_small_d_closed_forms():
    for beta in (0.2, 1.0, 2.5):
        cb, sb = math.cos(beta), math.sin(beta)
        assert abs(nfkit.wigner_d(1, 0, 0, cb) - cb) < 1e-14
        assert abs(nfkit.wigner_d(1, 1, 1, cb) - (1 + cb) / 2) < 1e-14
        assert abs(nfkit.wigner_d(1, 1, 0, cb) + sb / math.sqrt(2)) < 1e-14
        assert abs(nfkit.wigner_d(2, 0, 0, cb) - (3 * cb**2 - 1) / 2) < 1e-14


def test_phase_retrieval_at_small_bandlimit():
    n = nfkit.wigner_coefficient_count(2)
    A = nfkit.wigner_matrix(2, 8 * n, 3)
    rng = np.random.default_rng(2)
    alpha = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = np.abs(A @ alpha)
    est = nfkit.phase_retrieve(y, A, restarts=20, seed=1)
    assert np.linalg.norm(np.abs(A @ est) - y) / np.linalg.norm(y) < 1e-6


def test_runner_round_trip_is_deterministic():
    names = nfkit.experiment_names()
    assert "music2d" in names and len(names) == 12
    cfg = json.loads(nfkit.default_config("mvdr"))
    cfg["trials"] = 3
    rows1, _ = nfkit.run_experiment(cfg)
    rows2, _ = nfkit.run_experiment(json.dumps(cfg))
    assert rows1 == rows2 and len(rows1) == 3
    assert all(float(r["distortionless_error"]) < 1e-10 for r in rows1)


def test_configuration_errors_raise_value_error():
    with pytest.raises(ValueError):
        nfkit.run('{"experiment": "regions", "params": {"bogus": 1}}')
    assert "/params/bogus" in nfkit.validate('{"experiment": "regions", "params": {"bogus": 1}}')
    with pytest.raises(ValueError):
        nfkit.ArrayGeometry(0, 0.005, 30e9)
