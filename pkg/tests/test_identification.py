import numpy as np
import pytest

import koopmangl as kg
from conftest import planted_system, simulate_planted
from koopmangl.errors import InsufficientHistoryError, RankDeficiencyError
from koopmangl.gl_kernel import GLKernel, gl_weights
from koopmangl.identification import (
    assemble,
    assemble_lifted,
    build_targets,
    error_bound,
    identify,
    load_model,
    save_model,
    solve_ls,
)


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


# -- build_targets -------------------------------------------------------------


def test_targets_single_lag_formula():
    rng = _rng(0)
    Z = rng.standard_normal((8, 3))
    kern = gl_weights(0.3, 1)  # w_1 = -0.3
    ks, Y = build_targets(Z, kern)
    assert ks.tolist() == list(range(0, 7))
    for i, k in enumerate(ks):
        assert np.allclose(Y[i], Z[k + 1] - 0.3 * Z[k], rtol=1e-15)


def test_targets_constant_sequence_gives_partial_binomial_sum():
    kern = gl_weights(0.4, 6)
    Z = np.ones((12, 1))
    _, Y = build_targets(Z, kern)
    expected = float(np.sum(kern.weights))
    assert np.allclose(Y, expected, rtol=1e-14)


def test_targets_markov_degenerate():
    rng = _rng(1)
    Z = rng.standard_normal((6, 2))
    ks, Y = build_targets(Z, GLKernel.markov())
    assert ks.tolist() == [0, 1, 2, 3, 4]
    assert np.array_equal(Y, Z[1:])


def test_targets_column_count_formula():
    Z = _rng(2).standard_normal((13, 2))  # T = 12
    ks, Y = build_targets(Z, gl_weights(0.5, 10))
    assert len(ks) == 12 - 10 + 1 == 3
    assert ks.tolist() == [9, 10, 11]


def test_targets_insufficient_history():
    Z = np.zeros((5, 2))
    with pytest.raises(InsufficientHistoryError):
        build_targets(Z, gl_weights(0.5, 5))


# -- assemble ------------------------------------------------------------------


def test_assemble_concatenates_trajectories():
    rng = _rng(3)
    kern = gl_weights(0.5, 4)
    Zs = [rng.standard_normal((20, 3)), rng.standard_normal((15, 3))]
    Us = [rng.standard_normal((19, 1)), rng.standard_normal((14, 1))]
    data = assemble_lifted(Zs, Us, kern)
    assert data.n_samples == (19 - 4 + 1) + (14 - 4 + 1)
    assert data.Y.shape == (3, data.n_samples)
    assert data.Omega.shape == (4, data.n_samples)
    assert data.index_map[0] == (0, 3)
    assert data.index_map[-1] == (1, 13)
    assert data.mu > 0


def test_assemble_skips_short_trajectories():
    rng = _rng(4)
    kern = gl_weights(0.5, 10)
    Zs = [rng.standard_normal((5, 2)), rng.standard_normal((30, 2))]
    Us = [rng.standard_normal((4, 1)), rng.standard_normal((29, 1))]
    data = assemble_lifted(Zs, Us, kern)
    assert all(ti == 1 for ti, _ in data.index_map)


def test_assemble_all_short_raises():
    kern = gl_weights(0.5, 50)
    with pytest.raises(InsufficientHistoryError):
        assemble_lifted([np.zeros((10, 2))], [np.zeros((9, 1))], kern)


def test_assemble_underdetermined_warns_not_fatal():
    rng = _rng(5)
    Z = rng.standard_normal((6, 4))
    U = rng.standard_normal((5, 1))
    with pytest.warns(UserWarning, match="rank deficient"):
        data = assemble_lifted([Z], [U], GLKernel.markov())
    assert data.underdetermined


# -- solve_ls ------------------------------------------------------------------


def _planted_regression(rng, p=3, m=2, K=30, d_scale=0.0):
    Theta0 = rng.standard_normal((p, p + m))
    Omega = rng.standard_normal((p + m, K))
    D = d_scale * rng.standard_normal((p, K))
    Y = Theta0 @ Omega + D
    import scipy.linalg

    sig = scipy.linalg.svdvals(Omega)
    from koopmangl.identification import RegressionData

    data = RegressionData(
        Y=Y,
        Omega=Omega,
        n_samples=K,
        mu=float(sig[-1] ** 2),
        sigma_max=float(sig[0]),
        index_map=[(0, k) for k in range(K)],
    )
    return Theta0, D, data


def test_solve_ls_exact_recovery():
    Theta0, _, data = _planted_regression(_rng(6))
    theta, resid = solve_ls(data, 0.0)
    assert np.linalg.norm(theta - Theta0) <= 1e-10 * (1 + np.linalg.norm(Theta0))
    assert resid <= 1e-10


def test_solve_ls_error_identity_matches_pseudoinverse():
    # planted disturbance: Theta_hat - Theta0 = D @ pinv(Omega), checked explicitly
    Theta0, D, data = _planted_regression(_rng(7), p=4, m=2, K=40, d_scale=0.3)
    theta, _ = solve_ls(data, 0.0)
    expected = D @ np.linalg.pinv(data.Omega)
    err = np.linalg.norm((theta - Theta0) - expected)
    assert err <= 1e-10 * (1 + np.linalg.norm(Theta0))


def test_solve_ls_error_bound_dominates():
    Theta0, D, data = _planted_regression(_rng(8), d_scale=0.5)
    theta, _ = solve_ls(data, 0.0)
    bound = error_bound(np.linalg.norm(D), data.mu)
    assert np.linalg.norm(theta - Theta0) <= bound


def test_solve_ls_residual_orthogonality():
    _, _, data = _planted_regression(_rng(9), d_scale=1.0)
    theta, _ = solve_ls(data, 0.0)
    R = data.Y - theta @ data.Omega
    lhs = np.linalg.norm(R @ data.Omega.T)
    assert lhs <= 1e-8 * np.linalg.norm(data.Y) * np.linalg.norm(data.Omega)


def test_solve_ls_duplicate_columns_invariance():
    Theta0, D, data = _planted_regression(_rng(10), d_scale=0.2)
    theta1, _ = solve_ls(data, 0.0)
    import scipy.linalg
    from koopmangl.identification import RegressionData

    Y2 = np.hstack([data.Y, data.Y])
    O2 = np.hstack([data.Omega, data.Omega])
    sig = scipy.linalg.svdvals(O2)
    data2 = RegressionData(
        Y=Y2, Omega=O2, n_samples=2 * data.n_samples,
        mu=float(sig[-1] ** 2), sigma_max=float(sig[0]),
        index_map=data.index_map * 2,
    )
    theta2, _ = solve_ls(data2, 0.0)
    assert np.allclose(theta1, theta2, rtol=0, atol=1e-12 * (1 + np.abs(theta1).max()))


def test_solve_ls_rank_deficiency_raises_and_ridge_escapes():
    rng = _rng(11)
    import scipy.linalg
    from koopmangl.identification import RegressionData

    base = rng.standard_normal((2, 25))
    Omega = np.vstack([base, base[0] + base[1]])  # exactly dependent rows
    Y = rng.standard_normal((2, 25))
    sig = scipy.linalg.svdvals(Omega)
    data = RegressionData(
        Y=Y, Omega=Omega, n_samples=25,
        mu=float(sig[-1] ** 2), sigma_max=float(sig[0]),
        index_map=[(0, k) for k in range(25)],
    )
    with pytest.raises(RankDeficiencyError, match="ridge"):
        solve_ls(data, 0.0)
    theta, _ = solve_ls(data, 1e-8)
    assert np.all(np.isfinite(theta))


def test_solve_ls_ridge_matches_closed_form():
    _, _, data = _planted_regression(_rng(12), d_scale=0.4)
    lam = 1e-3
    theta, _ = solve_ls(data, lam)
    O = data.Omega
    closed = data.Y @ O.T @ np.linalg.inv(O @ O.T + lam * np.eye(O.shape[0]))
    assert np.allclose(theta, closed, rtol=0, atol=1e-10)


def test_error_bound_values_and_domain():
    assert error_bound(0.0, 5.0) == 0.0
    assert error_bound(1.0, 4.0) == 0.5
    with pytest.raises(ValueError):
        error_bound(1.0, 0.0)


# -- planted end-to-end ---------------------------------------------------------


def test_planted_model_recovery_through_assemble():
    rng = _rng(13)
    A0, B0, kern = planted_system(rng, p=4, m=1, n_mem=5, alpha=0.5)
    U = rng.choice([-1.0, 1.0], size=(250, 1))
    Z = simulate_planted(A0, B0, kern, U, rng.standard_normal((5, 4)))
    data = assemble_lifted([Z], [U], kern)
    theta, resid = solve_ls(data, 0.0)
    assert resid <= 1e-9
    assert np.linalg.norm(theta - np.hstack([A0, B0])) <= 1e-9


def test_markov_reduction_equals_plain_edmdc(small_dataset, default_dict):
    model = identify(small_dataset, default_dict, 0.0, 0)
    # independent EDMDc: z+ = A z + B u via pseudoinverse over the same columns
    Zs, Us, Ys = [], [], []
    for t in small_dataset.train:
        Z = default_dict.lift_trajectory(t.states)
        Zs.append(Z[:-1])
        Ys.append(Z[1:])
        Us.append(t.inputs)
    Omega = np.hstack([np.concatenate(Zs), np.concatenate(Us)]).T
    Y = np.concatenate(Ys).T
    theta_ref = Y @ np.linalg.pinv(Omega)
    theta = np.hstack([model.A_bar, model.B_bar])
    assert np.allclose(theta, theta_ref, rtol=0, atol=1e-12 * (1 + np.abs(theta_ref).max()))


def test_identify_benchmark_best_config(benchmark_dataset, default_dict):
    from koopmangl.augmented import build_augmented, spectral_radius

    model = identify(benchmark_dataset, default_dict, 0.2, 100)
    assert np.all(np.isfinite(model.A_bar)) and np.all(np.isfinite(model.B_bar))
    rho = spectral_radius(build_augmented(model)).value
    assert rho < 1.05
    rep = model.fit_report
    assert rep.mu > 0 and rep.residual_fro > 0
    assert rep.data_hash == benchmark_dataset.manifest_hash()


def test_identify_markov_and_affine_baselines(small_dataset):
    m1 = identify(small_dataset, kg.affine_dictionary(2), 0.0, 0)
    assert m1.kernel.is_markov and m1.p == 3
    m2 = identify(small_dataset, kg.affine_dictionary(2), 0.3, 20)
    assert m2.n_mem == 20 and m2.p == 3


# -- persistence -----------------------------------------------------------------


def test_model_roundtrip_bitwise(tmp_path, small_dataset, default_dict):
    from koopmangl.prediction import evaluate_rollout, one_step

    model = identify(small_dataset, default_dict, 0.3, 12)
    path = save_model(model, tmp_path / "model.json")
    loaded = load_model(path)
    assert np.array_equal(loaded.A_bar, model.A_bar)
    assert np.array_equal(loaded.B_bar, model.B_bar)
    assert np.array_equal(loaded.kernel.weights, model.kernel.weights)
    assert loaded.dict == model.dict
    assert loaded.fit_report == model.fit_report
    traj = small_dataset.test[0]
    a = evaluate_rollout(model, traj, 40)
    b = evaluate_rollout(loaded, traj, 40)
    assert np.array_equal(a.predicted_states, b.predicted_states)
    assert one_step(model, traj).nrmse == one_step(loaded, traj).nrmse


def test_model_format_rejects_unknown(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "something-else"}')
    with pytest.raises(ValueError):
        load_model(bad)
