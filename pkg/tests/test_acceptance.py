"""Acceptance gate: one test per release criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.
"""

import math
import time

import numpy as np
import scipy.linalg

from hsdemix import baselines, dataio, diagnostics, dictlearn, evaluation, matrices, prox, solver
from hsdemix.dictlearn import DictLearnConfig
from hsdemix.evaluation import LabeledScores
from hsdemix.solver import DemixConfig, Sparsity

import oracles

JOBS = 8


def _report(name, ok, detail=""):
    print(f"\n[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{name}: {detail}"


def test_prox_exactness():
    t0 = time.time()
    rng = np.random.default_rng(1000)
    worst_soft = worst_col = 0.0
    for _ in range(1000):
        rows = int(rng.integers(1, 9))
        cols = int(rng.integers(1, 9))
        y = matrices.matrix(rng.standard_normal((rows, cols)) * rng.uniform(0.5, 3.0))
        tau = float(rng.uniform(0.0, 2.0))

        soft = prox.soft_threshold(y, tau)
        closed = np.sign(y) * np.maximum(np.abs(y) - tau, 0.0)
        worst_soft = max(worst_soft, float(np.max(np.abs(soft - closed))))

        colp = prox.column_soft_threshold(y, tau)
        norms = np.linalg.norm(y, axis=0)
        scale = np.where(norms > 0, np.maximum(norms - tau, 0.0) / np.where(norms > 0, norms, 1.0), 0.0)
        worst_col = max(worst_col, float(np.max(np.abs(colp - y * scale))))

    worst_svt = 0.0
    for _ in range(200):
        rows = int(rng.integers(2, 7))
        cols = int(rng.integers(2, 6))
        y = matrices.matrix(rng.standard_normal((rows, cols)))
        tau = float(rng.uniform(0.0, 1.5))
        sig_in = oracles.singular_values_charpoly(y)
        sig_out = oracles.singular_values_charpoly(prox.svt(y, tau))
        worst_svt = max(worst_svt, float(np.max(np.abs(sig_out - np.maximum(sig_in - tau, 0.0)))))

    elapsed = time.time() - t0
    ok = worst_soft <= 1e-10 and worst_col <= 1e-10 and worst_svt <= 1e-8 and elapsed < 5.0
    _report(
        "prox-exactness", ok,
        f"soft {worst_soft:.1e}, column {worst_col:.1e}, svt {worst_svt:.1e}, {elapsed:.1f}s",
    )


def test_solver_oracle_equivalence():
    t0 = time.time()
    seeds = [100, 102, 103, 104, 105, 106, 107, 108, 109, 110]
    worst = 0.0
    for seed in seeds:
        for mode, sparsity in ((Sparsity.ENTRY, 6), (Sparsity.COLUMN, 3)):
            spec = dataio.SynthSpec(f=8, d=3, nm=12, r=2, mode=mode, sparsity=sparsity, seed=seed)
            m, _, dic = dataio.synthesize(spec)
            lam = 0.4 * evaluation.lambda_upper(m, dic.mat, mode)
            cfg = DemixConfig(mode=mode, lam=lam, nu_bar=1e-3, max_iters=30000, rel_tol=1e-9)
            sol = solver.apg_demix(m, dic.mat, cfg)
            l_ref, s_ref = oracles.ista_demix(m, dic.mat, lam, 1e-3, mode.value, 50000)
            got = oracles.objective_terms(m, sol.l_hat, sol.s_hat, dic.mat, 1e-3, lam, mode.value)
            want = oracles.objective_terms(m, l_ref, s_ref, dic.mat, 1e-3, lam, mode.value)
            worst = max(worst, abs(got - want) / abs(want))
    elapsed = time.time() - t0
    ok = worst <= 1e-4 and elapsed < 60.0
    _report("solver-oracle-equivalence", ok, f"worst rel {worst:.2e}, {elapsed:.1f}s")


def test_entrywise_exact_recovery():
    t0 = time.time()
    spec = dataio.SynthSpec(f=50, d=10, nm=400, r=3, mode=Sparsity.ENTRY, sparsity=40, seed=8)
    m, gt, dic = dataio.synthesize_separated(spec)
    cert = diagnostics.entrywise_certificate(gt, dic.mat)
    labels = dataio.support_labels(gt)
    base = DemixConfig(mode=Sparsity.ENTRY, lam=1.0, max_iters=1500, rel_tol=1e-6)
    best, entries = evaluation.lambda_sweep(m, dic.mat, base, 20, labels, jobs=JOBS)
    best_lam = max((e for e in entries if e.auc is not None), key=lambda e: e.auc).lam
    sol = solver.apg_demix(m, dic.mat, DemixConfig(
        mode=Sparsity.ENTRY, lam=best_lam, max_iters=4000, rel_tol=1e-8))
    rel = float(np.linalg.norm(sol.l_hat - gt.l, "fro") / np.linalg.norm(gt.l, "fro"))
    support = set(zip(*np.nonzero(np.abs(sol.s_hat) > 1e-3)))
    elapsed = time.time() - t0
    ok = (
        cert.theorem_holds
        and rel <= 1e-2
        and support == set(gt.support)
        and best.auc >= 0.99
        and elapsed < 120.0
    )
    _report(
        "entrywise-exact-recovery", ok,
        f"cert {cert.theorem_holds}, rel L {rel:.2e}, support {support == set(gt.support)}, "
        f"auc {best.auc:.4f}, {elapsed:.1f}s",
    )


def test_columnwise_oracle_recovery():
    t0 = time.time()
    spec = dataio.SynthSpec(f=50, d=10, nm=400, r=3, mode=Sparsity.COLUMN, sparsity=20, seed=21)
    m, gt, dic = dataio.synthesize_separated(spec)
    cert = diagnostics.columnwise_certificate(gt, dic.mat)
    cfg = DemixConfig(mode=Sparsity.COLUMN, lam=0.12, max_iters=4000, rel_tol=1e-8)
    sol = solver.apg_demix(m, dic.mat, cfg)
    cols = set(np.flatnonzero(np.linalg.norm(sol.s_hat, axis=0) > 1e-3).tolist())
    u0, _, _ = np.linalg.svd(np.asarray(gt.l), full_matrices=False)
    uh, _, _ = np.linalg.svd(np.asarray(sol.l_hat), full_matrices=False)
    angle = float(np.max(scipy.linalg.subspace_angles(uh[:, :3], u0[:, :3])))
    elapsed = time.time() - t0
    ok = cert.theorem_holds and cols == gt.support and angle <= 1e-2 and elapsed < 120.0
    _report(
        "columnwise-oracle-recovery", ok,
        f"cert {cert.theorem_holds}, support {cols == gt.support}, angle {angle:.2e} rad, {elapsed:.1f}s",
    )


def test_pseudo_inverse_failure_regime():
    t0 = time.time()
    spec = dataio.SynthSpec(
        f=50, d=10, nm=400, r=15, mode=Sparsity.ENTRY, sparsity=40,
        l_scale=20.0, s_scale=1.0, seed=42,
    )
    m, gt, dic = dataio.synthesize(spec)
    labels = dataio.support_labels(gt)
    base = DemixConfig(mode=Sparsity.ENTRY, lam=1.0, max_iters=1500, rel_tol=1e-5)
    best_d, _ = evaluation.lambda_sweep(m, dic.mat, base, 20, labels, jobs=JOBS)
    mt = baselines.transform_pinv(m, dic.mat)
    eye = matrices.matrix(np.eye(10))
    best_r, _ = evaluation.lambda_sweep(mt, eye, base, 20, labels, jobs=JOBS)
    gap = best_d.auc - best_r.auc
    elapsed = time.time() - t0
    ok = gap >= 0.05 and elapsed < 180.0
    _report(
        "pseudo-inverse-failure-regime", ok,
        f"demix auc {best_d.auc:.4f}, rpca-pinv auc {best_r.auc:.4f}, gap {gap:.4f}, {elapsed:.1f}s",
    )


def test_diagnostics_consistency():
    t0 = time.time()
    instances = []
    for seed in (8, 21, 50, 51):
        mode = Sparsity.ENTRY if seed % 2 == 0 else Sparsity.COLUMN
        sparsity = 12 if mode is Sparsity.ENTRY else 5
        spec = dataio.SynthSpec(f=24, d=6, nm=80, r=3, mode=mode, sparsity=sparsity, seed=seed)
        instances.append(dataio.synthesize(spec))
        instances.append(dataio.synthesize_separated(spec))

    domination = True
    ranges_ok = True
    lambda_ok = True
    for m, gt, dic in instances:
        u, _, v = diagnostics.low_rank_factors(gt.l)
        mu_hat = diagnostics.mu(gt, dic.mat)
        sampled = oracles.sample_rayleigh_mu(
            u, v, dic.mat, sorted(gt.support), gt.mode.value, 1000, seed=7
        )
        domination &= mu_hat >= sampled - 1e-7

        rep = (
            diagnostics.entrywise_certificate(gt, dic.mat)
            if gt.mode is Sparsity.ENTRY
            else diagnostics.columnwise_certificate(gt, dic.mat)
        )
        nm = gt.l.shape[1]
        ranges_ok &= 0.0 <= rep.mu <= 1.0
        ranges_ok &= 0.0 <= rep.gamma_u <= 1.0
        ranges_ok &= 0.0 <= rep.beta_u <= 1.0
        ranges_ok &= rep.r / nm - 1e-12 <= rep.gamma_v <= 1.0

        s = rep.s_count
        lam_max = (
            math.sqrt(rep.alpha_l) * (1 - rep.mu) - math.sqrt(rep.r * rep.alpha_u) * rep.mu
        ) / math.sqrt(s)
        lambda_ok &= abs(rep.lambda_max - lam_max) <= 1e-12
        if gt.mode is Sparsity.ENTRY:
            if 0.0 <= rep.c_e < 1.0:
                lam_min = (1 + rep.c_e) / (1 - rep.c_e) * rep.xi_e
                lambda_ok &= abs(rep.lambda_min - lam_min) <= 1e-12
            cap = 0.5 * (1 - rep.mu) ** 2 * nm / rep.r
            lambda_ok &= abs(rep.s_e_max - cap) <= 1e-12
        else:
            cc = (rep.alpha_u / rep.alpha_l) * rep.gamma_v * rep.beta_u / (1 - rep.mu) ** 2
            lambda_ok &= abs(rep.c_c - cc) <= 1e-12
            den = 1.0 - s * cc
            if den > 0:
                lam_min = (rep.xi_c + math.sqrt(rep.r * s * rep.alpha_u) * rep.mu * cc) / den
                lambda_ok &= abs(rep.lambda_min - lam_min) <= 1e-12
            cap = (rep.alpha_l / (rep.alpha_u * rep.gamma_v)) * (1 - rep.mu) ** 2 / rep.beta_u
            lambda_ok &= abs(rep.s_c_max - cap) <= 1e-12

    elapsed = time.time() - t0
    ok = domination and ranges_ok and lambda_ok
    _report(
        "diagnostics-consistency", ok,
        f"mu domination {domination}, ranges {ranges_ok}, lambda formulas {lambda_ok}, {elapsed:.1f}s",
    )


def test_lipschitz_identity():
    t0 = time.time()
    rng = np.random.default_rng(2000)
    worst = 0.0
    for _ in range(100):
        f = int(rng.integers(2, 12))
        dcols = int(rng.integers(1, 8))
        d = matrices.matrix(rng.standard_normal((f, dcols)) * rng.uniform(0.2, 3.0))
        worst = max(worst, abs(solver.lipschitz_constant(d) - oracles.gram_lipschitz(d)))
    elapsed = time.time() - t0
    ok = worst <= 1e-8
    _report("lipschitz-identity", ok, f"worst abs err {worst:.2e}, {elapsed:.1f}s")


def test_dictionary_learning():
    t0 = time.time()
    rng = np.random.default_rng(3000)
    monotone = True
    for trial in range(50):
        f = int(rng.integers(6, 16))
        p = int(rng.integers(10, 40))
        y = matrices.matrix(rng.standard_normal((f, p)))
        cfg = DictLearnConfig(
            d=int(rng.integers(2, 6)),
            rho=float(rng.uniform(0.01, 0.5)),
            epsilon=1e-4,
            max_alternations=25,
            fista_iters=80,
            seed=trial,
        )
        _, fits = dictlearn.learn_dictionary(y, cfg)
        monotone &= all(b <= a for a, b in zip(fits, fits[1:]))

    d0 = rng.standard_normal((20, 5))
    d0 /= np.linalg.norm(d0, axis=0)
    a0 = rng.standard_normal((5, 40)) * (rng.uniform(size=(5, 40)) < 0.3)
    y = matrices.matrix(d0 @ a0)
    _, fits = dictlearn.learn_dictionary(
        y, DictLearnConfig(d=5, rho=0.01, epsilon=1e-4, max_alternations=100, seed=1)
    )
    generative = fits[-1] <= 0.05
    elapsed = time.time() - t0
    ok = monotone and generative
    _report(
        "dictionary-learning", ok,
        f"monotone {monotone}, generative fit {fits[-1]:.4f}, {elapsed:.1f}s",
    )


def test_roc_criteria():
    t0 = time.time()
    rng = np.random.default_rng(4000)

    scores = rng.uniform(size=60)
    labels = (rng.uniform(size=60) < 0.4).astype(int)
    a = evaluation.roc(LabeledScores(scores=scores, labels=labels)).auc
    b = evaluation.roc(LabeledScores(scores=scores**3, labels=labels)).auc
    invariant = abs(a - b) <= 1e-12

    curve = evaluation.roc(LabeledScores(
        scores=np.array([0.9, 0.7, 0.7, 0.4, 0.4, 0.1]),
        labels=np.array([1, 1, 0, 1, 0, 0]),
    ))
    hand = abs(curve.auc - 7.0 / 9.0) <= 1e-12

    flip_ok = True
    for _ in range(200):
        s = rng.standard_normal(40)
        y = (rng.uniform(size=40) < rng.uniform(0.2, 0.8)).astype(int)
        if y.sum() in (0, 40):
            continue
        flip_ok &= evaluation.roc(LabeledScores(scores=s, labels=y)).auc >= 0.5

    elapsed = time.time() - t0
    ok = invariant and hand and flip_ok
    _report(
        "roc-criteria", ok,
        f"monotone-invariance {invariant}, hand curve {hand}, flip>=0.5 {flip_ok}, {elapsed:.1f}s",
    )


def test_first_prox_zero_forcing():
    t0 = time.time()
    rng = np.random.default_rng(5000)
    all_zero = True
    for _ in range(20):
        f = int(rng.integers(4, 12))
        dcols = int(rng.integers(2, 6))
        nm = int(rng.integers(5, 20))
        m = matrices.matrix(rng.standard_normal((f, nm)) * rng.uniform(0.5, 4.0))
        d = matrices.matrix(rng.standard_normal((f, dcols)))
        lam = evaluation.lambda_upper(m, d, Sparsity.ENTRY)
        cfg = DemixConfig(mode=Sparsity.ENTRY, lam=lam, max_iters=1)
        sol = solver.apg_demix(m, d, cfg)
        all_zero &= float(np.max(np.abs(sol.s_hat))) == 0.0
    elapsed = time.time() - t0
    _report("first-prox-zero-forcing", all_zero, f"20 instances exact zero, {elapsed:.1f}s")
