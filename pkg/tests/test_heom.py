"""Hierarchy solver: structure, integrator, limits, and first-principles oracle."""

import math

import numpy as np
import pytest
import scipy.sparse as sp

from qubit_gp.bath import BathParams
from qubit_gp.heom import (
    ADOSet,
    BlowUpError,
    HeomConfig,
    HierarchyIndex,
    SystemOperators,
    auto_depth,
    build_generator,
    certify_convergence,
    evolve,
    evolve_grid,
    evolve_rho,
    heom_rhs,
    init_ados,
    step_rk4,
)
from qubit_gp.phase import GpEngineConfig, bargmann_phase
from qubit_gp.results import angle_diff
from qubit_gp.rwa import decay_envelope

T = 2.0 * math.pi
RNG = np.random.default_rng(7)
NO_CHECK = GpEngineConfig(validate_states=False)


# ---------------------------------------------------------------- structure

def test_hierarchy_enumeration():
    hier = HierarchyIndex(3)
    assert hier.size == 10  # (3+1)(3+2)/2
    assert hier.indices[0] == (0, 0)
    assert all(n1 + n2 <= 3 for n1, n2 in hier.indices)
    m = hier.position[(1, 1)]
    assert hier.indices[hier.up1[m]] == (2, 1)
    assert hier.indices[hier.dn2[m]] == (1, 0)
    # out-of-range neighbors map to the zero slot
    top = hier.position[(3, 0)]
    assert hier.up1[top] == hier.size


def test_init_ados():
    ados = init_ados(math.pi / 2, depth=3)
    assert np.max(np.abs(ados.physical - 0.5 * np.ones((2, 2)))) < 1e-15
    assert np.count_nonzero(np.abs(ados.ops).sum(axis=(1, 2))) == 1
    ados = init_ados(math.pi, depth=2)
    assert np.max(np.abs(ados.physical - np.diag([0.0, 1.0]))) < 1e-15


def test_system_operators():
    ops = SystemOperators()
    assert np.allclose(ops.h_sys, np.diag([1.0, 0.0]))
    assert np.allclose(ops.v @ ops.v, np.eye(2))  # involutory
    a = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
    assert np.allclose(ops.commutator(ops.v, a) + ops.anticommutator(ops.v, a), 2 * ops.v @ a)


def test_rhs_free_evolution_at_zero_coupling():
    bath = BathParams(0.0, 0.7)
    ados = init_ados(1.2, depth=3)
    deriv = heom_rhs(ados, bath)
    h = SystemOperators().h_sys
    expected = -1j * (h @ ados.physical - ados.physical @ h)
    assert np.max(np.abs(deriv.physical - expected)) < 1e-15
    assert np.max(np.abs(deriv.ops[1:])) == 0.0  # hierarchy stays inert


def test_rhs_traceless_physical_block():
    hier = HierarchyIndex(3)
    ops = RNG.normal(size=(hier.size, 2, 2)) + 1j * RNG.normal(size=(hier.size, 2, 2))
    deriv = heom_rhs(ADOSet(hier, ops), BathParams(0.9, 0.3))
    assert abs(np.trace(deriv.physical)) < 1e-13


def test_rhs_matches_sparse_generator():
    # the flattened generator and the gather implementation are two routes
    # to the same equation; they must agree to rounding
    bath = BathParams(0.7, 0.2)
    gen, hier = build_generator(bath, depth=4, scaled=False)
    ops = RNG.normal(size=(hier.size, 2, 2)) + 1j * RNG.normal(size=(hier.size, 2, 2))
    flat = gen @ ops.reshape(-1)
    deriv = heom_rhs(ADOSet(hier, ops), bath)
    assert np.max(np.abs(flat.reshape(hier.size, 2, 2) - deriv.ops)) < 1e-13


def test_scaled_generator_is_similarity_transform():
    bath = BathParams(0.8, 0.1)
    raw, hier = build_generator(bath, depth=4, scaled=False)
    scaled, _ = build_generator(bath, depth=4, scaled=True)
    s = np.repeat(
        bath.coupling ** (hier.n1 + hier.n2)
        * np.sqrt([math.factorial(a) * math.factorial(b) for a, b in hier.indices]),
        4,
    )
    transformed = sp.diags(1.0 / s) @ raw @ sp.diags(s)
    assert abs(transformed - scaled).max() < 1e-12


def test_coefficient_validation_weak_coupling_short_time():
    # the population must follow the closed-form envelope up to the genuine
    # counter-rotating correction, which enters at O(W^2 t^2) with a tiny
    # prefactor here; a wrong downward weight (e.g. lambda/2 instead of
    # W^2/2) inflates the quadratic coefficient by ~lambda^2/W^2 = 10^4
    theta, bath = 0.8, BathParams(0.05, 5.0)
    traj = evolve(theta, bath, HeomConfig(depth=8, certify=False))
    pop = traj.states[:, 0, 0].real
    f = decay_envelope(traj.times, bath)
    target = math.cos(theta / 2) ** 2 * f * f
    early = (traj.times > 0.0) & (traj.times <= 0.4)
    quad_coef = np.max(np.abs(pop[early] - target[early]) / traj.times[early] ** 2)
    assert quad_coef < 5e-4
    assert np.max(np.abs(pop - target)) < 2e-3  # whole period, weak coupling


# ---------------------------------------------------------------- integrator

def test_step_rk4_zero_state_stays_zero():
    hier = HierarchyIndex(2)
    ados = ADOSet(hier, np.zeros((hier.size, 2, 2), dtype=complex))
    out = step_rk4(ados, 0.01, BathParams(0.6, 0.4))
    assert np.max(np.abs(out.ops)) == 0.0
    assert out.time == pytest.approx(0.01)


def test_step_rk4_unitary_period():
    # W = 0: coherence phase advances by e^{-i omega0 T} = 1 over a period
    bath = BathParams(0.0, 0.7)
    ados = init_ados(math.pi / 3, depth=1)
    n = 800  # RK4 phase error (omega0*dt)^4 * omega0*T ~ 9e-11 here
    for _ in range(n):
        ados = step_rk4(ados, T / n, bath)
    assert np.max(np.abs(ados.physical - init_ados(math.pi / 3, 1).physical)) < 1e-9


def test_step_rk4_fourth_order():
    bath = BathParams(0.1, 5.0)
    theta = 1.0

    def run(nsteps):
        ados = init_ados(theta, depth=4)
        for _ in range(nsteps):
            ados = step_rk4(ados, T / nsteps, bath)
        return ados.physical

    ref = run(1600)
    err_coarse = np.max(np.abs(run(100) - ref))
    err_fine = np.max(np.abs(run(200) - ref))
    ratio = err_coarse / err_fine
    assert 10.0 < ratio < 22.0  # asymptotic factor 16


def test_step_rk4_blowup_names_offending_index():
    bath = BathParams(1.5, 0.05)
    ados = init_ados(0.9, depth=8)
    with pytest.raises(BlowUpError) as err:
        for _ in range(400):
            ados = step_rk4(ados, 1.5, bath)  # far outside stability
    assert isinstance(err.value.index, tuple)


# ---------------------------------------------------------------- evolve

def test_evolve_unitary_limit_closed_form():
    theta, bath = 1.1, BathParams(0.0, 0.7)
    traj = evolve(theta, bath, HeomConfig(depth=1, certify=False, sample_stride=40))
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    for t, state in zip(traj.times, traj.states):
        expected = np.array(
            [[c * c, c * s * np.exp(-1j * t)], [c * s * np.exp(1j * t), s * s]]
        )
        assert np.max(np.abs(state - expected)) < 1e-10


def test_evolve_weak_coupling_matches_rwa_populations():
    theta, bath = math.pi / 3, BathParams(0.05, 5.0)
    traj = evolve(theta, bath, HeomConfig(depth=8, certify=False))
    f = decay_envelope(traj.times, bath)
    target = math.cos(theta / 2) ** 2 * f * f
    assert np.max(np.abs(traj.states[:, 0, 0].real - target)) < 2e-3


def test_evolve_strong_nonmarkovian_physicality():
    traj = evolve(math.pi / 3, BathParams(0.5, 0.05), HeomConfig(certify=False))
    phys = traj.physicality()
    assert phys["max_trace_dev"] < 1e-8
    assert traj.meta["herm_dev_raw"] < 1e-9
    assert phys["min_eig"] > -1e-7
    res = bargmann_phase(traj)
    assert res.overlap_abs > 0.05  # endpoint overlap stays away from zero


def test_evolve_is_linear_in_the_initial_state():
    bath = BathParams(0.6, 0.3)
    cfg = HeomConfig(depth=10, certify=False, sample_stride=100)
    rho_a = init_ados(0.7, 1).physical
    rho_b = init_ados(2.1, 1).physical
    alpha = 0.3
    mix = evolve_rho(alpha * rho_a + (1 - alpha) * rho_b, bath, cfg)
    a = evolve_rho(rho_a, bath, cfg)
    b = evolve_rho(rho_b, bath, cfg)
    combo = alpha * a.states + (1 - alpha) * b.states
    assert np.max(np.abs(mix.states - combo)) < 1e-10


def test_evolve_grid_matches_single_evolve():
    bath = BathParams(0.5, 0.05)
    cfg = HeomConfig(depth=16, certify=False, sample_stride=20)
    thetas = [0.6, 1.8]
    grid = evolve_grid(thetas, bath, cfg)
    for theta, traj in zip(thetas, grid):
        direct = evolve(theta, bath, cfg)
        assert np.max(np.abs(traj.states - direct.states)) < 1e-11


def test_evolve_attaches_passing_certificate():
    traj = evolve(1.0, BathParams(0.3, 0.5), HeomConfig(sample_stride=10))
    cert = traj.meta["certificate"]
    assert cert.passed
    assert cert.depth_refined == cert.depth + 5
    assert cert.dt_refined == pytest.approx(cert.dt / 2)


def test_trajectory_export_roundtrip(tmp_path):
    from qubit_gp.trajectory import read_trajectory_csv, write_trajectory_csv

    traj = evolve(1.0, BathParams(0.4, 0.8), HeomConfig(depth=6, certify=False, sample_stride=200))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    back = read_trajectory_csv(path)
    assert back.picture == "schrodinger" and back.source == "heom"
    assert np.max(np.abs(back.states - traj.states)) < 1e-15
    assert np.max(np.abs(back.times - traj.times)) < 1e-15


# ---------------------------------------------------------------- certification

def test_certify_unitary_limit_trivial():
    cert = certify_convergence(1.2, BathParams(0.0, 0.7), HeomConfig(depth=1, sample_stride=10))
    assert cert.passed
    assert cert.delta_phi < 1e-10
    assert cert.max_state_dev < 1e-9


def test_certify_weak_coupling_depth8():
    cert = certify_convergence(
        math.pi / 3, BathParams(0.05, 5.0), HeomConfig(depth=8, sample_stride=10)
    )
    assert cert.passed


def test_certify_depth_sweep_decreases_until_pass():
    # strong coupling, weakly damped: the hardest corner of the sweep range
    bath = BathParams(1.5, 0.05)
    cfg = lambda d: HeomConfig(depth=d, dt=bath.period / 1000.0, sample_stride=1)
    deltas = [certify_convergence(math.pi / 2, bath, cfg(d)).delta_phi for d in (60, 70, 80)]
    assert deltas[0] > deltas[1] > deltas[2]
    assert deltas[2] < 1e-4 * math.pi


def test_auto_depth_profile():
    assert auto_depth(BathParams(0.0, 0.05)) == 1
    assert auto_depth(BathParams(0.05, 5.0)) >= 6
    shallow = auto_depth(BathParams(0.5, 5.0))
    deep = auto_depth(BathParams(0.5, 0.05))
    deeper = auto_depth(BathParams(1.5, 0.05))
    assert shallow < deep < deeper


# ---------------------------------------------------------------- oracle

def test_full_hamiltonian_brute_force_oracle():
    """First-principles check of the hierarchy, counter-rotating terms included.

    Evolve qubit + discretized Lorentzian bath unitarily with the complete
    sigma_x coupling, truncated at two total excitations, and compare the
    reduced state against the hierarchy.  At W = 0.15 the counter-rotating
    effect (distance to the closed-form RWA state) is ~2.5e-2 while the
    residual against the hierarchy sits at the oracle's own truncation
    error, two orders of magnitude smaller.
    """
    w_c, lam, om0, theta = 0.15, 0.4, 1.0, math.pi / 3
    k_modes = 150
    u = (np.arange(k_modes) + 0.5) / k_modes
    om = np.clip(om0 + lam * np.tan(math.pi * (u - 0.5)), om0 - 40, om0 + 40)
    g = np.full(k_modes, w_c / math.sqrt(k_modes))

    pairs = [(j, k) for j in range(k_modes) for k in range(j, k_modes)]
    ppos = {p: i for i, p in enumerate(pairs)}
    nb = 1 + k_modes + len(pairs)
    dim = 2 * nb
    eb = np.zeros(nb)
    eb[1 : k_modes + 1] = om
    for i, (j, k) in enumerate(pairs):
        eb[1 + k_modes + i] = om[j] + om[k]
    rows, cols, vals = [], [], []

    def addsym(i, j, v):
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((v, v))

    for b in range(nb):
        rows.append(2 * b + 1), cols.append(2 * b + 1), vals.append(eb[b] + om0)
        rows.append(2 * b), cols.append(2 * b), vals.append(eb[b])
    for j in range(k_modes):
        addsym(1, 2 * (1 + j), g[j])          # |1,vac> <-> |0,1_j>
        addsym(0, 2 * (1 + j) + 1, g[j])      # |0,vac> <-> |1,1_j> (counter-rotating)
        for k in range(k_modes):
            b2 = 1 + k_modes + ppos[(min(j, k), max(j, k))]
            amp = g[j] * (math.sqrt(2.0) if j == k else 1.0)
            addsym(2 * (1 + k) + 1, 2 * b2, amp)
            addsym(2 * (1 + k), 2 * b2 + 1, amp)
    h_full = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr().astype(complex)

    n_steps, stride = 2000, 10
    dt = T / n_steps
    psi = np.zeros(dim, dtype=complex)
    psi[1] = math.cos(theta / 2)
    psi[0] = math.sin(theta / 2)
    gen = (-1j) * h_full

    def reduced(p):
        amp = p.reshape(nb, 2)
        r_ee = np.vdot(amp[:, 1], amp[:, 1]).real
        r_eg = np.sum(amp[:, 1] * amp[:, 0].conj())
        return np.array([[r_ee, r_eg], [np.conj(r_eg), 1.0 - r_ee]])

    samples = [reduced(psi)]
    for step in range(1, n_steps + 1):
        k1 = gen @ psi
        k2 = gen @ (psi + 0.5 * dt * k1)
        k3 = gen @ (psi + 0.5 * dt * k2)
        k4 = gen @ (psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if step % stride == 0:
            samples.append(reduced(psi))
    brute = np.array(samples)

    bath = BathParams(w_c, lam)
    heom = evolve(theta, bath, HeomConfig(depth=12, certify=False, dt=T / n_steps, sample_stride=stride))
    f = decay_envelope(heom.times, bath)
    rwa = np.empty_like(brute)
    rwa[:, 0, 0] = math.cos(theta / 2) ** 2 * f * f
    rwa[:, 0, 1] = 0.5 * math.sin(theta) * f * np.exp(-1j * om0 * heom.times)
    rwa[:, 1, 0] = np.conj(rwa[:, 0, 1])
    rwa[:, 1, 1] = 1.0 - rwa[:, 0, 0]

    effect = np.max(np.abs(brute - rwa))
    residual = np.max(np.abs(brute - heom.states))
    assert effect > 1e-2          # counter-rotating contribution is resolved
    assert residual < 1e-3        # hierarchy matches first principles
    assert residual < 0.1 * effect
