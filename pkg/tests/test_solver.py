import math

import numpy as np
import pytest

from hsdemix import dataio, evaluation, matrices, solver
from hsdemix.errors import DimensionError, DivergenceError, PreconditionError
from hsdemix.solver import DemixConfig, Sparsity

import oracles


def test_config_validation():
    with pytest.raises(PreconditionError):
        DemixConfig(mode=Sparsity.ENTRY, lam=0.0)
    with pytest.raises(PreconditionError):
        DemixConfig(mode=Sparsity.ENTRY, lam=1.0, shrink_factor=1.0)
    with pytest.raises(PreconditionError):
        DemixConfig(mode=Sparsity.ENTRY, lam=1.0, nu_bar=0.0)


def test_momentum_growth():
    t_prev, t = 1.0, 1.0
    for k in range(1000):
        assert t >= (k + 2) / 2.0
        t_next = solver.momentum_next(t)
        assert t_next > t
        t_prev, t = t, t_next


def test_lipschitz_trivial_cases():
    assert solver.lipschitz_constant(matrices.zeros(5, 3)) == 1.0
    q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((6, 3)))
    assert abs(solver.lipschitz_constant(matrices.matrix(q)) - 2.0) <= 1e-12


def test_lipschitz_matches_gram_oracle():
    rng = np.random.default_rng(1)
    d = matrices.matrix(rng.standard_normal((5, 3)))
    assert abs(solver.lipschitz_constant(d) - oracles.gram_lipschitz(d)) <= 1e-8


def test_objective_examples():
    rng = np.random.default_rng(2)
    m = matrices.matrix(rng.standard_normal((6, 8)))
    d = matrices.matrix(rng.standard_normal((6, 3)))
    cfg = DemixConfig(mode=Sparsity.ENTRY, lam=0.7)
    z_l = matrices.zeros(6, 8)
    z_s = matrices.zeros(3, 8)
    assert abs(
        solver.objective(m, z_l, z_s, d, 2.0, cfg) - 0.5 * np.sum(np.asarray(m) ** 2)
    ) <= 1e-12
    assert abs(
        solver.objective(m, m, z_s, d, 1.0, cfg) - matrices.norm(m, "nuclear")
    ) <= 1e-12


def test_objective_matches_term_oracle_both_modes():
    rng = np.random.default_rng(3)
    m = matrices.matrix(rng.standard_normal((5, 7)))
    d = matrices.matrix(rng.standard_normal((5, 2)))
    l = matrices.matrix(rng.standard_normal((5, 7)))
    s = matrices.matrix(rng.standard_normal((2, 7)))
    for mode in (Sparsity.ENTRY, Sparsity.COLUMN):
        cfg = DemixConfig(mode=mode, lam=0.3)
        got = solver.objective(m, l, s, d, 0.9, cfg)
        want = oracles.objective_terms(m, l, s, d, 0.9, 0.3, mode.value)
        assert abs(got - want) <= 1e-10


def test_objective_shape_mismatch():
    cfg = DemixConfig(mode=Sparsity.ENTRY, lam=1.0)
    m = matrices.zeros(3, 4)
    d = matrices.zeros(3, 2)
    with pytest.raises(DimensionError):
        solver.objective(m, matrices.zeros(3, 3), matrices.zeros(2, 4), d, 1.0, cfg)


def test_zero_data_solves_in_one_pass():
    cfg = DemixConfig(mode=Sparsity.ENTRY, lam=1.0)
    sol = solver.apg_demix(matrices.zeros(4, 6), matrices.matrix(np.eye(4)), cfg)
    assert sol.converged
    assert sol.iters_used == 1
    assert np.max(np.abs(sol.l_hat)) == 0.0
    assert np.max(np.abs(sol.s_hat)) == 0.0


def test_continuation_schedule():
    rng = np.random.default_rng(4)
    m = matrices.matrix(rng.standard_normal((5, 6)))
    d = matrices.matrix(rng.standard_normal((5, 2)))
    cfg = DemixConfig(mode=Sparsity.ENTRY, lam=0.5, shrink_factor=0.9, nu_bar=1e-3)
    lf = solver.lipschitz_constant(d)
    state = solver.initial_state(m, d)
    nu0 = state.nu
    expected_steps = math.ceil(math.log(cfg.nu_bar / nu0) / math.log(cfg.shrink_factor))
    nus = [state.nu]
    for _ in range(expected_steps + 5):
        state = solver.apg_step(m, d, cfg, lf, state)
        nus.append(state.nu)
    assert all(b <= a for a, b in zip(nus, nus[1:]))
    assert nus[expected_steps] <= cfg.nu_bar * (1 + 1e-12)
    assert nus[expected_steps - 1] > cfg.nu_bar
    assert all(abs(v - cfg.nu_bar) <= 1e-15 for v in nus[expected_steps:])


def test_objective_trace_finite_and_final_below_first():
    rng = np.random.default_rng(5)
    spec = dataio.SynthSpec(f=10, d=3, nm=20, r=2, mode=Sparsity.ENTRY, sparsity=5, seed=6)
    m, gt, dic = dataio.synthesize(spec)
    cfg = DemixConfig(mode=Sparsity.ENTRY, lam=0.2, max_iters=500)
    sol = solver.apg_demix(m, dic.mat, cfg)
    trace = np.asarray(sol.objective_trace)
    assert np.all(np.isfinite(trace))
    assert trace[-1] <= trace[0]


def test_divergence_reports_iteration(monkeypatch):
    # an understated step bound makes the gradient step expand and blow up
    monkeypatch.setattr(solver, "lipschitz_constant", lambda d: 1e-3)
    rng = np.random.default_rng(7)
    m = matrices.matrix(rng.standard_normal((6, 8)))
    d = matrices.matrix(rng.standard_normal((6, 3)) * 5.0)
    cfg = DemixConfig(mode=Sparsity.ENTRY, lam=0.5, max_iters=2000)
    with pytest.raises(DivergenceError) as err:
        solver.apg_demix(m, d, cfg)
    assert err.value.iteration >= 1


def test_fixed_point_barely_moves():
    # rank-1 data with lambda above the zero-forcing level: (beta - nu_bar) u v^T
    # paired with s = 0 satisfies both prox fixed-point equations at nu_bar
    rng = np.random.default_rng(8)
    f, nm, dcols = 7, 9, 3
    u = rng.standard_normal(f)
    u /= np.linalg.norm(u)
    v = rng.standard_normal(nm)
    v /= np.linalg.norm(v)
    d = rng.standard_normal((f, dcols))
    d /= np.linalg.norm(d, axis=0)
    nu_bar = 1e-2
    beta = 2.0
    m = matrices.matrix(beta * np.outer(u, v))
    lam = 2.0 * np.max(np.abs(d.T @ u))
    cfg = DemixConfig(mode=Sparsity.ENTRY, lam=lam, nu_bar=nu_bar)
    l_star = matrices.matrix((beta - nu_bar) * np.outer(u, v))
    s_star = matrices.zeros(dcols, nm)

    lf = solver.lipschitz_constant(matrices.matrix(d))
    state = solver.SolverState(
        l_cur=l_star, l_prev=l_star, s_cur=s_star, s_prev=s_star,
        t_cur=1.0, t_prev=1.0, nu=nu_bar, iter=0,
    )
    new = solver.apg_step(m, matrices.matrix(d), cfg, lf, state)
    assert np.linalg.norm(new.l_cur - l_star, "fro") <= 1e-10
    assert np.linalg.norm(new.s_cur - s_star, "fro") <= 1e-10


def test_first_sparse_update_zero_at_endpoint_lambda():
    rng = np.random.default_rng(9)
    for _ in range(5):
        m = matrices.matrix(rng.standard_normal((8, 10)))
        d = matrices.matrix(rng.standard_normal((8, 4)))
        lam = evaluation.lambda_upper(m, d, Sparsity.ENTRY)
        cfg = DemixConfig(mode=Sparsity.ENTRY, lam=lam, max_iters=1)
        sol = solver.apg_demix(m, d, cfg)
        assert np.max(np.abs(sol.s_hat)) == 0.0


def test_reference_solver_trace_is_monotone_at_fixed_nu():
    # the no-momentum proximal gradient descends the fixed-nu objective
    # every iteration; the accelerated trace need not
    rng = np.random.default_rng(11)
    m = np.asarray(rng.standard_normal((8, 12)))
    d = rng.standard_normal((8, 3))
    lam, nu = 0.2, 1e-2
    lf = 1.0 + np.linalg.norm(d, 2) ** 2
    l = np.zeros_like(m)
    s = np.zeros((3, 12))
    prev = oracles.objective_terms(m, l, s, d, nu, lam, "entry")
    for _ in range(2000):
        resid = (m - l - d @ s) / lf
        u, sig, vt = np.linalg.svd(l + resid, full_matrices=False)
        l = (u * np.maximum(sig - nu / lf, 0.0)) @ vt
        gs = s + d.T @ resid
        s = np.sign(gs) * np.maximum(np.abs(gs) - nu * lam / lf, 0.0)
        cur = oracles.objective_terms(m, l, s, d, nu, lam, "entry")
        assert cur <= prev + 1e-12
        prev = cur


def test_apg_matches_plain_proximal_gradient_reference():
    # light version of the oracle-equivalence gate, one seed per mode
    for mode, sparsity in ((Sparsity.ENTRY, 6), (Sparsity.COLUMN, 3)):
        spec = dataio.SynthSpec(f=8, d=3, nm=12, r=2, mode=mode, sparsity=sparsity, seed=100)
        m, gt, dic = dataio.synthesize(spec)
        lam = 0.4 * evaluation.lambda_upper(m, dic.mat, mode)
        cfg = DemixConfig(mode=mode, lam=lam, nu_bar=1e-3, max_iters=30000, rel_tol=1e-9)
        sol = solver.apg_demix(m, dic.mat, cfg)
        l_ref, s_ref = oracles.ista_demix(m, dic.mat, lam, 1e-3, mode.value, 50000)
        got = oracles.objective_terms(m, sol.l_hat, sol.s_hat, dic.mat, 1e-3, lam, mode.value)
        want = oracles.objective_terms(m, l_ref, s_ref, dic.mat, 1e-3, lam, mode.value)
        assert abs(got - want) / abs(want) <= 1e-4


def test_entrywise_recovery_small_instance():
    spec = dataio.SynthSpec(f=30, d=6, nm=150, r=2, mode=Sparsity.ENTRY, sparsity=15, seed=10)
    m, gt, dic = dataio.synthesize_separated(spec)
    cfg = DemixConfig(mode=Sparsity.ENTRY, lam=0.1, max_iters=3000, rel_tol=1e-7)
    sol = solver.apg_demix(m, dic.mat, cfg)
    rel = np.linalg.norm(sol.l_hat - gt.l, "fro") / np.linalg.norm(gt.l, "fro")
    assert rel <= 1e-2
    got = set(zip(*np.nonzero(np.abs(sol.s_hat) > 1e-3)))
    assert got == set(gt.support)
