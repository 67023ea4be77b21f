import numpy as np
import pytest
from hypothesis import given, strategies as st

from tkaczmarz import (ControlSequence, DivergenceError, Regularizer, SolveConfig, compute_beta,
                       dual_value, linbreg, masked_entries, matrix_entries, matrix_rows, solve,
                       solve_batched, solve_noisy, tensor_slices, vector_rows)
from tkaczmarz.apps import gen_lowrank_tensor_problem
from tkaczmarz.constraints import MaskedConstraints
from tkaczmarz.convex import f_value
from tkaczmarz.tensor_core import bcirc, tprod, unfold

seeds = st.integers(0, 2**32 - 1)


def well_conditioned(rng, n):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.linspace(1, 2, n)


# control sequences

def test_cyclic_sequence():
    seq = ControlSequence.cyclic(4)
    assert seq.take(10).ravel().tolist() == [0, 1, 2, 3, 0, 1, 2, 3, 0, 1]


def test_cyclic_batches_wrap():
    b = ControlSequence.cyclic(5).take(3, b=3)
    assert b.tolist() == [[0, 1, 2], [3, 4, 0], [1, 2, 3]]


def test_explicit_list():
    seq = ControlSequence.explicit([2, 0, 2], n=3)
    assert seq.take(5).ravel().tolist() == [2, 0, 2, 2, 0]
    with pytest.raises(ValueError):
        ControlSequence.explicit([5], n=3)


def test_weighted_probabilities(rng):
    norms2 = rng.uniform(0.1, 3, 7)
    seq = ControlSequence.weighted(norms2, seed=3)
    assert abs(seq.probs.sum() - 1) <= 1e-12
    draws = seq.take(40000).ravel()
    freq = np.bincount(draws, minlength=7) / draws.size
    assert np.allclose(freq, norms2 / norms2.sum(), atol=0.01)


def test_custom_probabilities():
    with pytest.raises(ValueError):
        ControlSequence.custom([0.5, 0.6])
    seq = ControlSequence.custom([0, 1.0, 0])
    assert set(seq.take(50).ravel().tolist()) == {1}


def test_sequence_seeded():
    a = ControlSequence.uniform(9, seed=11).take(100)
    b = ControlSequence.uniform(9, seed=11).take(100)
    c = ControlSequence.uniform(9, seed=12).take(100)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_random_batches_have_no_repeats():
    for batch in ControlSequence.uniform(10, 1).take(50, b=6):
        assert len(set(batch.tolist())) == 6
    with pytest.raises(ValueError):
        ControlSequence.uniform(3).batches(4)


# constraint sets

def test_zero_norm_rejected():
    a = np.ones((3, 2))
    a[1] = 0
    with pytest.raises(ValueError):
        vector_rows(a, np.ones(3))
    with pytest.raises(ValueError):
        MaskedConstraints((2, 2), [0, 0], [1, 1], [1.0, 2.0])


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(step=0)
    with pytest.raises(ValueError):
        SolveConfig(batch_size=0)


# solve

def test_classical_kaczmarz_fixed_point(rng):
    a = well_conditioned(rng, 12)
    x = rng.standard_normal(12)
    tr = solve(vector_rows(a, a @ x), Regularizer.squared_fro(), ControlSequence.cyclic(12),
               SolveConfig(max_iters=3000, reference=x))
    assert tr.rel_err[-1] <= 1e-8
    assert tr.x.shape == (12,)


def test_identity_rows_one_sweep():
    x = np.array([1.5, -2.0, 0.25])
    tr = solve(vector_rows(np.eye(3), x), Regularizer.elastic_l1(0), ControlSequence.cyclic(3),
               SolveConfig(max_iters=3, trace_every=1))
    assert np.array_equal(tr.x, x)


def test_identity_rows_two_steps_by_hand():
    # z1 = t b0 e0, x1 = S(z1); z2 = z1 + t (b1 - x1[1]) e1
    x = np.array([3.0, -2.0])
    lam, t = 0.5, 0.8
    tr = solve(vector_rows(np.eye(2), x), Regularizer.elastic_l1(lam), ControlSequence.cyclic(2),
               SolveConfig(step=t, max_iters=2, trace_every=1))
    assert np.allclose(tr.z, [t * 3.0, t * -2.0])
    assert np.allclose(tr.x, [t * 3 - lam, t * -2 + lam])


def test_tensor_tnn_scaled_replica():
    a, x, b = gen_lowrank_tensor_problem(60, 20, 20, 20, 2, seed=5)
    tr = solve(tensor_slices(a, b), Regularizer.tnn(1.0), ControlSequence.cyclic(60),
               SolveConfig(step=1.0, safe_step=False, max_iters=2000, trace_every=100,
                           reference=x, track_bregman=False))
    err = tr.column("rel_err")
    assert err[-1] <= 1e-2
    assert np.all(np.diff(err[1:]) <= 0)
    assert tr.warnings


def test_safe_step_enforced_for_tensors(rng):
    a, x, b = gen_lowrank_tensor_problem(6, 3, 3, 4, 1, seed=1)
    with pytest.raises(ValueError):
        solve(tensor_slices(a, b), Regularizer.tnn(1), ControlSequence.cyclic(6), SolveConfig(step=0.5))
    tr = solve(tensor_slices(a, b), Regularizer.tnn(1), ControlSequence.cyclic(6),
               SolveConfig(step=0.4, max_iters=5))
    assert not tr.warnings


def test_vector_large_step_warns(rng):
    a = rng.standard_normal((5, 5))
    tr = solve(vector_rows(a, a @ np.ones(5)), Regularizer.squared_fro(), ControlSequence.cyclic(5),
               SolveConfig(step=40, max_iters=5))
    assert len(tr.warnings) == 1


def test_tolerance_stop(rng):
    a = well_conditioned(rng, 6)
    tr = solve(vector_rows(a, a @ np.ones(6)), Regularizer.squared_fro(), ControlSequence.cyclic(6),
               SolveConfig(max_iters=100000, tol=1e-6, trace_every=6))
    assert tr.stop_reason == "tol" and tr.iterations < 100000
    assert tr.rel_change[-1] < 1e-6


def test_divergence_detected(rng):
    a = rng.standard_normal((30, 10))
    with pytest.raises(DivergenceError) as info:
        linbreg(vector_rows(a, a @ np.ones(10)), Regularizer.squared_fro(),
                SolveConfig(step=5, max_iters=5000, trace_every=50))
    assert info.value.trace is not None


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        tensor_slices(np.zeros((3, 2, 4)), np.zeros((2, 1, 4)))


def test_degenerate_tensor_matches_vector(rng):
    a = rng.standard_normal((8, 5))
    x = rng.standard_normal(5)
    cfg = SolveConfig(step=0.7, max_iters=64, trace_every=1)
    reg = Regularizer.elastic_l1(0.2)
    tv = solve(vector_rows(a, a @ x), reg, ControlSequence.cyclic(8), cfg)
    tt = solve(tensor_slices(a[:, :, None], (a @ x)[:, None, None]), reg, ControlSequence.cyclic(8), cfg)
    assert np.array_equal(tv.x, tt.x.ravel())
    assert tv.residual == tt.residual


def test_matrix_rows_and_entries_agree(rng):
    # A X = B row by row equals <e_i a_i^T, X> = b_ij entry by entry when K = 1
    a = rng.standard_normal((10, 4))
    x = rng.standard_normal((4, 1))
    cfg = SolveConfig(step=1.0, max_iters=200, trace_every=10)
    reg = Regularizer.nuclear(0.1)
    rows = solve(matrix_rows(a, a @ x), reg, ControlSequence.cyclic(10), cfg)
    mats = a[:, :, None]
    ent = solve(matrix_entries(mats, (a @ x).ravel()), reg, ControlSequence.cyclic(10), cfg)
    assert np.allclose(rows.x, ent.x)


def test_matrix_entries_recovery(rng):
    u, v = rng.standard_normal((6, 1)), rng.standard_normal((1, 5))
    x = u @ v
    mats = rng.standard_normal((40, 6, 5))
    cons = matrix_entries(mats, np.einsum("mij,ij->m", mats, x))
    tr = solve(cons, Regularizer.nuclear(0.5), ControlSequence.cyclic(40),
               SolveConfig(step=1.0, max_iters=40000, trace_every=1000, reference=x))
    assert tr.rel_err[-1] < 1e-6


def test_solve_noisy_zero_noise_identical(rng):
    a = rng.standard_normal((20, 8))
    b = a @ rng.standard_normal(8)
    cfg = SolveConfig(max_iters=300, trace_every=7)
    seq = ControlSequence.weighted(np.sum(a * a, axis=1), seed=4)
    plain = solve(vector_rows(a, b), Regularizer.squared_fro(), seq, cfg)
    noisy = solve_noisy(vector_rows(a, b, noise=np.zeros(20)), Regularizer.squared_fro(), seq, cfg)
    assert plain.csv_text() == noisy.csv_text()
    assert noisy.epsilon == 0
    with pytest.raises(ValueError):
        solve_noisy(vector_rows(a, b), Regularizer.squared_fro(), seq, cfg)


def test_noisy_epsilon(rng):
    a = rng.standard_normal((6, 3))
    e = rng.standard_normal(6)
    cons = vector_rows(a, np.zeros(6), noise=e)
    assert cons.epsilon() == pytest.approx(np.max(np.abs(e) / np.linalg.norm(a, axis=1)))


def test_noise_floor_finite(rng):
    a = rng.standard_normal((40, 10))
    x = rng.standard_normal(10)
    cons = vector_rows(a, a @ x, noise=0.01 * rng.standard_normal(40))
    tr = solve_noisy(cons, Regularizer.squared_fro(), ControlSequence.weighted(cons.norms2, 2),
                     SolveConfig(max_iters=20000, trace_every=100, reference=x))
    tail = tr.column("rel_err")[-50:]
    assert np.all(np.isfinite(tail)) and 0 < np.median(tail) < 0.1


def test_batched_b1_equals_solve(rng):
    a = rng.standard_normal((15, 6))
    b = a @ rng.standard_normal(6)
    cfg = SolveConfig(max_iters=100, trace_every=5)
    seq = ControlSequence.uniform(15, seed=9)
    one = solve(vector_rows(a, b), Regularizer.elastic_l1(0.1), seq, cfg)
    two = solve_batched(vector_rows(a, b), Regularizer.elastic_l1(0.1), seq, cfg)
    order = seq.take(100)
    three = solve_batched(vector_rows(a, b), Regularizer.elastic_l1(0.1), list(order), cfg)
    assert one.csv_text() == two.csv_text() == three.csv_text()


def test_full_batch_masked_equals_linbreg(rng):
    img = rng.standard_normal((8, 6))
    mask = rng.random((8, 6)) < 0.6
    cons = masked_entries(img, mask)
    cfg = SolveConfig(step=1.3, max_iters=30, trace_every=1, batch_size=cons.n)
    reg = Regularizer.nuclear(0.4)
    a = solve(cons, reg, ControlSequence.cyclic(cons.n), cfg)
    b = linbreg(cons, reg, cfg)
    assert np.allclose(a.x, b.x, atol=1e-12)


def test_batched_accumulates_at_same_iterate(rng):
    a = rng.standard_normal((4, 3))
    b = rng.standard_normal(4)
    tr = solve_batched(vector_rows(a, b), Regularizer.elastic_l1(0.3), [[0, 2]],
                       SolveConfig(step=0.9, max_iters=1, trace_every=1))
    z = 0.9 * sum(b[i] * a[i] / (a[i] @ a[i]) for i in (0, 2))
    assert np.allclose(tr.z, z)


def test_linbreg_landweber(rng):
    a = well_conditioned(rng, 8)
    x = rng.standard_normal(8)
    tr = linbreg(vector_rows(a, a @ x), Regularizer.squared_fro(),
                 SolveConfig(step=0.4, max_iters=400, reference=x))
    assert tr.rel_err[-1] < 1e-8


def test_linbreg_masked_update(rng):
    img = rng.standard_normal((5, 5))
    mask = rng.random((5, 5)) < 0.5
    tr = linbreg(masked_entries(img, mask), Regularizer.squared_fro(),
                 SolveConfig(step=1.0, max_iters=1, trace_every=1))
    assert np.allclose(tr.z, np.where(mask, img, 0))


# beta

def beta_oracle(a, t):
    n1, n2, n3 = a.shape
    w = np.exp(-2j * np.pi * np.outer(np.arange(n3), np.arange(n3)) / n3)
    best = np.inf
    for i in range(n1):
        f = a[i] @ w.T
        total = np.sum(np.abs(f) ** 2)
        for j in range(n3):
            r = np.sum(np.abs(f[:, j]) ** 2) / total
            if r > (n3 * np.finfo(float).eps) ** 2:
                best = min(best, t * r * (1 - t * r))
    return best


def test_beta_examples(rng):
    assert compute_beta(rng.standard_normal((3, 4, 1)), 0.3) == pytest.approx(0.3 * 0.7)
    a = np.repeat(rng.standard_normal((3, 4))[:, :, None], 5, axis=2)
    assert compute_beta(a, 0.2) == pytest.approx(0.2 * 0.8)
    with pytest.raises(ValueError):
        compute_beta(rng.standard_normal((2, 2, 4)), 0.5)
    with pytest.raises(ValueError):
        compute_beta(rng.standard_normal((2, 2, 4)), 0)


@given(st.integers(1, 5), st.integers(1, 4), st.integers(1, 6), seeds, st.floats(0.01, 0.99))
def test_beta_matches_enumeration(n1, n2, n3, seed, frac):
    a = np.random.default_rng(seed).standard_normal((n1, n2, n3))
    t = frac * min(2 / n3, 1)
    beta = compute_beta(a, t)
    assert beta > 0
    assert beta == pytest.approx(beta_oracle(a, t), abs=1e-12)


# dual value

def test_dual_value(rng):
    a = rng.standard_normal((5, 3))
    b = rng.standard_normal(5)
    cons = vector_rows(a, b)
    for r in (Regularizer.squared_fro(), Regularizer.elastic_l1(0.5)):
        assert dual_value(cons, r, np.zeros(5)) == 0
    y = rng.standard_normal(5)
    aty = a.T @ y
    assert dual_value(cons, Regularizer.squared_fro(), y) == pytest.approx(0.5 * aty @ aty - y @ b)
    with pytest.raises(ValueError):
        dual_value(cons, Regularizer.squared_fro(), np.zeros(4))


def test_weak_duality(rng):
    a, x, b = gen_lowrank_tensor_problem(8, 3, 2, 4, 1, seed=2)
    cons = tensor_slices(a, b)
    reg = Regularizer.tnn(0.3)
    tr = solve(cons, reg, ControlSequence.cyclic(8), SolveConfig(step=0.45, max_iters=20000,
                                                                trace_every=1000))
    fx = f_value(reg, tr.x)
    for _ in range(20):
        # -g(y) <= f(x) for feasible x, i.e. g(y) >= -f(x_hat)
        y = rng.standard_normal(b.shape)
        assert dual_value(cons, reg, y) >= -fx - 1e-8


# descent properties on small instances

@given(seeds)
def test_bregman_descent_and_step_bound(seed):
    a, x, b = gen_lowrank_tensor_problem(6, 3, 2, 4, 1, seed)
    t = 0.3
    tr = solve(tensor_slices(a, b), Regularizer.tnn(0.5), ControlSequence.uniform(6, seed),
               SolveConfig(step=t, max_iters=60, trace_every=1, reference=x))
    d = tr.column("bregman")
    gain = tr.column("step_gain")[1:]
    assert np.all(np.diff(d) <= 1e-12)
    need = t * (1 - t * 4 / 2) * gain
    assert np.all(d[:-1] - d[1:] >= need - 1e-10 * (1 + np.abs(d[:-1])))


def test_dual_iterate_in_range(rng):
    a, x, b = gen_lowrank_tensor_problem(3, 5, 2, 4, 1, seed=8)
    tr = solve(tensor_slices(a, b), Regularizer.tnn(0.2), ControlSequence.cyclic(3),
               SolveConfig(step=0.3, max_iters=25))
    m = bcirc(a).T
    z = unfold(tr.z)
    coef, *_ = np.linalg.lstsq(m, z, rcond=None)
    assert np.linalg.norm(m @ coef - z) <= 1e-10 * (1 + np.linalg.norm(z))
    # a generic tensor of the same shape is not in the range
    g = unfold(rng.standard_normal(tr.z.shape))
    coef, *_ = np.linalg.lstsq(m, g, rcond=None)
    assert np.linalg.norm(m @ coef - g) > 1e-3


def test_determinism(rng):
    a, x, b = gen_lowrank_tensor_problem(10, 4, 3, 6, 2, seed=3)
    runs = [solve(tensor_slices(a, b), Regularizer.tnn(0.1), ControlSequence.weighted(
        np.sum(a * a, axis=(1, 2)), 5), SolveConfig(step=0.3, max_iters=200, trace_every=3,
                                                    reference=x)) for _ in range(2)]
    assert runs[0].csv_text() == runs[1].csv_text()
    assert runs[0].csv_text().splitlines()[0] == "iter,index,residual,rel_change,rel_err,bregman"


def test_residual_is_full_system(rng):
    a, x, b = gen_lowrank_tensor_problem(5, 3, 2, 4, 1, seed=4)
    tr = solve(tensor_slices(a, b), Regularizer.squared_fro(), ControlSequence.cyclic(5),
               SolveConfig(step=0.4, max_iters=7, trace_every=7))
    assert tr.residual[-1] == pytest.approx(np.linalg.norm(tprod(a, tr.x) - b))
