"""Time integration: exact linear propagation, regressions, convergence studies."""

import numpy as np
import pytest

from fnlslab.evolution import (
    EvolutionConfig,
    TrajectoryRecord,
    continuity_probe,
    eps_convergence_study,
    integrate,
    linear_semigroup_apply,
    read_trajectory,
    suggested_dt,
    sup_l2_gap,
    write_trajectory,
)
from fnlslab.nonlinearity import PolynomialNonlinearity, cubic, linear_transport
from fnlslab.spectral import (
    SpectralField,
    random_field,
    sobolev_norm,
    truncate_modes,
)

ZERO = PolynomialNonlinearity.zero()


def decaying_data(cutoff, seed=0, rate=1.0):
    rng = np.random.default_rng(seed)
    ks = np.arange(-cutoff, cutoff + 1)
    return SpectralField(
        np.exp(-rate * np.abs(ks)) * np.exp(2j * np.pi * rng.random(2 * cutoff + 1)),
        cutoff,
    )


# -- the semigroup -----------------------------------------------------------------


def test_semigroup_examples():
    out = linear_semigroup_apply(SpectralField.from_modes({1: 1.0}, 1), 0.7, 3.5, 0.0)
    assert abs(out.coefficient(1) - np.exp(-0.7j)) < 1e-15
    out = linear_semigroup_apply(SpectralField.from_modes({2: 1.0}, 2), 1.0, 4.0, 1.0)
    assert abs(out.coefficient(2) - np.exp(-16j - 4.0)) < 1e-14
    c = SpectralField.constant(2.0 - 1j)
    out = linear_semigroup_apply(c, 5.0, 3.0, 0.3)
    assert abs(out.coefficient(0) - (2.0 - 1j)) < 1e-15


def test_semigroup_contraction_and_composition():
    f = random_field(16, 1.0, np.random.default_rng(0))
    for s in (-1.0, 0.0, 2.0):
        assert sobolev_norm(linear_semigroup_apply(f, 0.4, 2.5, 0.2), s) <= sobolev_norm(f, s) + 1e-14
    a = linear_semigroup_apply(linear_semigroup_apply(f, 0.3, 2.5, 0.1), 0.45, 2.5, 0.1)
    b = linear_semigroup_apply(f, 0.75, 2.5, 0.1)
    assert sobolev_norm(a - b) < 1e-13


def test_backward_heat_refused():
    f = SpectralField.from_modes({1: 1.0}, 1)
    with pytest.raises(ValueError):
        linear_semigroup_apply(f, -0.1, 3.0, 1.0)
    # eps = 0 flows run backward fine
    linear_semigroup_apply(f, -0.1, 3.0, 0.0)


# -- integrate: exact regressions -----------------------------------------------------


def test_zero_nonlinearity_matches_semigroup():
    phi = random_field(16, 1.0, np.random.default_rng(1))
    cfg = EvolutionConfig(alpha=2.5, eps=0.3, cutoff=16, dt=1e-2, horizon=0.5, record_every=10)
    traj = integrate(phi, ZERO, cfg)
    for t, snap in zip(traj.times, traj.snapshots):
        exact = linear_semigroup_apply(phi, t, 2.5, 0.3)
        assert sobolev_norm(snap - exact) < 1e-13


def test_linear_transport_exact_solution():
    # ut + i D^alpha u = i ux has coefficients phi_hat(k) e^{(-i|k|^alpha - k) t}.
    K = 64
    phi = decaying_data(K, seed=2)
    cfg = EvolutionConfig(alpha=3.0, eps=0.0, cutoff=K, dt=1e-3, horizon=1.0, record_every=100)
    traj = integrate(phi, linear_transport(1j), cfg)
    ks = phi.wavenumbers()
    worst = 0.0
    for t, snap in zip(traj.times, traj.snapshots):
        exact = phi.coeffs * np.exp((-1j * np.abs(ks) ** 3.0 - ks) * t)
        worst = max(worst, float(np.max(np.abs(snap.coeffs - exact) / np.abs(exact))))
    assert worst <= 1e-8, worst


def plane_wave_error(dt, lam=3.0, amp=2.0, k0=1, alpha=3.0, horizon=1.0):
    cfg = EvolutionConfig(
        alpha=alpha, eps=0.0, cutoff=8, dt=dt, horizon=horizon,
        record_every=max(1, int(round(horizon / dt))),
    )
    traj = integrate(SpectralField.from_modes({k0: amp}, 8), cubic(1j * lam), cfg)
    mu = abs(k0) ** alpha - lam * amp**2
    exact = amp * np.exp(-1j * mu * horizon)
    # the wave stays a single mode: all other coefficients at roundoff
    others = np.abs(traj.snapshots[-1].coeffs).copy()
    others[k0 + 8] = 0.0
    assert np.max(others) < 1e-12
    return abs(traj.snapshots[-1].coefficient(k0) - exact) / abs(exact)


def test_plane_wave_regression_and_temporal_order():
    e1 = plane_wave_error(1e-3)
    e2 = plane_wave_error(5e-4)
    assert e1 <= 1e-7, e1
    assert 12.0 <= e1 / e2 <= 20.0, (e1, e2)  # 16x within 25%


def test_pure_heat_dispersion_amplitudes():
    phi = random_field(12, 1.0, np.random.default_rng(3))
    cfg = EvolutionConfig(alpha=3.0, eps=0.1, cutoff=12, dt=1e-2, horizon=1.0, record_every=20)
    traj = integrate(phi, ZERO, cfg)
    ks = phi.wavenumbers().astype(float)
    for t, snap in zip(traj.times, traj.snapshots):
        expect = np.exp(-0.1 * ks**2 * t) * np.abs(phi.coeffs)
        assert np.max(np.abs(np.abs(snap.coeffs) - expect)) < 1e-13


def test_eps_monotone_sobolev_decay():
    phi = random_field(12, 1.0, np.random.default_rng(4))
    cfg = EvolutionConfig(alpha=2.7, eps=0.05, cutoff=12, dt=1e-2, horizon=1.0, record_every=10)
    traj = integrate(phi, ZERO, cfg)
    for s in (0.0, 1.5):
        norms = [sobolev_norm(u, s) for u in traj.snapshots]
        assert all(b <= a + 1e-13 for a, b in zip(norms, norms[1:]))


def test_mass_conservation_gauge_invariant_cubic():
    phi = random_field(16, 3.0, np.random.default_rng(5), amplitude=0.3)
    cfg = EvolutionConfig(alpha=3.0, eps=0.0, cutoff=16, dt=1e-3, horizon=1.0, record_every=100)
    traj = integrate(phi, cubic(1j), cfg)
    m0 = sobolev_norm(phi)
    drift = max(abs(sobolev_norm(u) - m0) for u in traj.snapshots)
    assert drift < 1e-9, drift


def test_galerkin_consistency_smooth_small_data():
    base = random_field(8, 4.0, np.random.default_rng(6), amplitude=0.2)
    runs = []
    for K in (16, 32):
        cfg = EvolutionConfig(alpha=3.0, eps=0.0, cutoff=K, dt=1e-3, horizon=0.5, record_every=50)
        runs.append(integrate(base.with_cutoff(K), cubic(1j), cfg))
    assert sup_l2_gap(runs[0], runs[1]) < 1e-6


def test_initial_data_above_cutoff_rejected():
    phi = random_field(32, 1.0, np.random.default_rng(7))
    cfg = EvolutionConfig(alpha=3.0, cutoff=16, dt=1e-3, horizon=0.01)
    with pytest.raises(ValueError):
        integrate(phi, ZERO, cfg)


def test_blowup_marks_record_truncated():
    # the one-sided growth flow crosses a tiny ceiling quickly, without raising
    phi = decaying_data(16, seed=8, rate=0.2)
    cfg = EvolutionConfig(
        alpha=3.0, eps=0.0, cutoff=16, dt=1e-3, horizon=2.0,
        record_every=10, blowup_ceiling=1e2,
    )
    traj = integrate(phi, linear_transport(1j), cfg)
    assert traj.truncated
    assert traj.times[-1] < 2.0
    assert all(np.all(np.isfinite(s.coeffs)) for s in traj.snapshots)


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(alpha=2.0)
    with pytest.raises(ValueError):
        EvolutionConfig(alpha=3.0, dt=-1e-3)
    with pytest.raises(ValueError):
        EvolutionConfig(alpha=3.0, eps=-0.1)
    with pytest.raises(ValueError):
        EvolutionConfig(alpha=3.0, scheme="leapfrog")


def test_suggested_dt_scales():
    assert suggested_dt(64, 3.0, eps=0.1) == 1e-3
    assert suggested_dt(256, 4.0, eps=0.0) == pytest.approx(256.0**-2)


# -- viscosity convergence ---------------------------------------------------------------


def test_eps_study_heat_matches_closed_form():
    phi = random_field(10, 1.5, np.random.default_rng(9))
    cfg = EvolutionConfig(alpha=3.0, eps=0.1, cutoff=10, dt=1e-2, horizon=0.5, record_every=5)
    eps_list = [1e-1, 1e-2, 1e-3]
    table = eps_convergence_study(phi, ZERO, cfg, eps_list)
    ks = phi.wavenumbers().astype(float)
    times = np.arange(0.0, 0.5 + 1e-12, 5e-2)
    for e1, e2, measured in table.pairs:
        exact = max(
            np.sqrt(
                np.sum(
                    np.abs(phi.coeffs) ** 2
                    * (np.exp(-e1 * ks**2 * t) - np.exp(-e2 * ks**2 * t)) ** 2
                )
            )
            for t in times
        )
        assert abs(measured - exact) < 1e-12
    # same-eps difference vanishes
    same = eps_convergence_study(phi, ZERO, cfg, [1e-2, 1e-2])
    assert same.pairs[0][2] == 0.0
    # the closed form fixes the fitted exponent; compare fits
    import math

    xs = [math.log(abs(e1 - e2)) for e1, e2, d in table.pairs]
    ys = [math.log(d) for _, _, d in table.pairs]
    beta_exact = float(np.polyfit(xs, ys, 1)[0])
    assert abs(table.beta - beta_exact) < 1e-12


def test_eps_rate_cubic_small_data():
    phi = random_field(8, 4.0, np.random.default_rng(10), amplitude=0.2).with_cutoff(16)
    cfg = EvolutionConfig(alpha=3.0, eps=0.1, cutoff=16, dt=1e-3, horizon=0.25, record_every=25)
    table = eps_convergence_study(phi, cubic(1j), cfg, [1e-1, 1e-2, 1e-3])
    assert table.beta >= 0.45, table.beta
    assert not table.truncated


# -- continuity of the data-to-solution map ------------------------------------------------


def test_continuity_probe_zero_perturbation():
    phi = random_field(8, 2.0, np.random.default_rng(11))
    cfg = EvolutionConfig(alpha=3.0, eps=0.0, cutoff=8, dt=1e-2, horizon=0.1, record_every=2)
    assert continuity_probe(phi, SpectralField.zeros(8), ZERO, cfg) == 0.0


def test_continuity_probe_linear_contraction():
    rng = np.random.default_rng(12)
    phi = random_field(8, 2.0, rng)
    dpsi = 1e-3 * random_field(8, 2.0, rng)
    cfg = EvolutionConfig(alpha=3.0, eps=0.2, cutoff=8, dt=1e-2, horizon=0.5, record_every=5)
    assert continuity_probe(phi, dpsi, ZERO, cfg) <= 1.0 + 1e-12


def test_continuity_probe_local_lipschitz_cubic():
    rng = np.random.default_rng(13)
    phi = random_field(8, 3.0, rng, amplitude=0.5).with_cutoff(16)
    d = random_field(8, 3.0, rng).with_cutoff(16)
    from fnlslab.spectral import sobolev_norm as nrm

    cfg = EvolutionConfig(alpha=3.0, eps=0.0, cutoff=16, dt=1e-3, horizon=0.25, record_every=25)
    ratios = []
    for size in (1e-4, 1e-5):
        scaled = (size / nrm(d, 1.0)) * d
        ratios.append(continuity_probe(phi, scaled, cubic(1j), cfg))
    assert 0.5 <= ratios[0] / ratios[1] <= 2.0, ratios


# -- sharp truncation of initial data ---------------------------------------------------


def test_truncation_is_identity_beyond_cutoff():
    phi = random_field(16, 1.0, np.random.default_rng(14))
    assert sobolev_norm(truncate_modes(phi, 16) - phi) == 0.0
    assert sobolev_norm(truncate_modes(phi, 40) - phi) == 0.0


def test_truncation_norm_bounds():
    # ||phi_mu||_{H^r} <= mu^{r-s} ||phi||_{H^s} (r > s) and
    # ||phi_mu - phi||_{H^r} <= mu^{-(s-r)} ||phi||_{H^s} (r < s), constant 1.
    s, r_hi, r_lo = 3.0, 4.0, 2.0
    rng = np.random.default_rng(15)
    for trial in range(100):
        phi = random_field(64, s + 0.5, rng)
        ns = sobolev_norm(phi, s)
        for mu in (4, 8, 16, 32):
            tr = truncate_modes(phi, mu)
            assert sobolev_norm(tr, r_hi) <= mu ** (r_hi - s) * ns * (1 + 1e-12)
            assert sobolev_norm(tr - phi, r_lo) <= mu ** (-(s - r_lo)) * ns * (1 + 1e-12)


# -- storage -------------------------------------------------------------------------------


def test_trajectory_round_trip(tmp_path):
    phi = random_field(6, 1.0, np.random.default_rng(16))
    cfg = EvolutionConfig(alpha=3.0, eps=0.01, cutoff=6, dt=1e-2, horizon=0.1, record_every=2)
    traj = integrate(phi, cubic(1j), cfg)
    csv, meta = tmp_path / "traj.csv", tmp_path / "traj.json"
    write_trajectory(traj, csv, meta, extra={"nonlinearity": "2 0 1 0 0 1\n"})
    back = read_trajectory(csv, meta)
    assert np.allclose(back.times, traj.times)
    assert back.config == traj.config
    assert back.truncated == traj.truncated
    for a, b in zip(traj.snapshots, back.snapshots):
        assert sobolev_norm(a - b) < 1e-15


def test_record_validation():
    cfg = EvolutionConfig(alpha=3.0, cutoff=4, dt=1e-2, horizon=0.1)
    snaps = [SpectralField.zeros(4), SpectralField.zeros(4)]
    with pytest.raises(ValueError):
        TrajectoryRecord(np.array([0.0, 0.0]), snaps, cfg)
    with pytest.raises(ValueError):
        TrajectoryRecord(np.array([0.0]), snaps, cfg)
