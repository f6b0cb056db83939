import itertools

import numpy as np
import pytest

from jointtri.errors import (
    DegenerateSpectrum,
    RankDeficient,
    SingularZ,
    ZeroColumnSum,
)
from jointtri.harness import gen_components, gen_tensor
from jointtri.tensor import (
    Tensor3,
    component_error_bound,
    component_gamma,
    estimate_components,
    first_order_model,
    match_columns,
    observable_matrices,
    recover_scales,
    slices,
    tensor_from_components,
)
from jointtri.triangularize import find_separating_beta, schur_initializer


def unit_theta(n):
    return np.ones(n) / np.sqrt(n)


class TestSlices:
    def test_identity_components_give_coordinate_slices(self):
        t = tensor_from_components(np.eye(3))
        for n, m in enumerate(slices(t)):
            expected = np.zeros((3, 3))
            expected[n, n] = 1.0
            assert np.array_equal(m, expected)

    def test_ground_tensor_slices_are_symmetric(self):
        z = gen_components(4, seed=1)
        for m in slices(tensor_from_components(z)):
            assert np.allclose(m, m.T, atol=1e-12)

    def test_flat_index_round_trip(self):
        rng = np.random.default_rng(2)
        t = Tensor3(n=3, data=rng.standard_normal(27))
        rebuilt = np.concatenate([m.ravel() for m in slices(t)])
        assert np.array_equal(rebuilt, np.asarray(t.data))


class TestObservableMatrices:
    def test_identity_components_give_coordinate_projectors(self):
        t = tensor_from_components(np.eye(4))
        mset, reduction = observable_matrices(t, 4, unit_theta(4))
        assert reduction is None
        for n, m in enumerate(mset.matrices):
            assert np.allclose(m, np.diag(np.eye(4)[n]), atol=1e-12)
        assert np.allclose(sum(mset.matrices), np.eye(4), atol=1e-12)

    def test_weighted_sum_is_identity(self):
        z = gen_components(4, seed=3)
        t = tensor_from_components(z)
        theta = unit_theta(4)
        mset, _ = observable_matrices(t, 4, theta)
        weights = np.sqrt(4) * theta
        total = sum(w * m for w, m in zip(weights, mset.matrices))
        assert np.allclose(total, np.eye(4), atol=1e-10)

    def test_zero_component_column_is_rank_deficient(self):
        z = gen_components(3, seed=4).copy()
        z[:, 1] = 0.0
        t = tensor_from_components(z)
        with pytest.raises(RankDeficient):
            observable_matrices(t, 3, unit_theta(3))

    def test_square_reduction_is_a_similarity_of_the_direct_path(self):
        z = gen_components(4, seed=5)
        t = tensor_from_components(z)
        theta = unit_theta(4)
        mset, _ = observable_matrices(t, 4, theta)
        weights = np.sqrt(4) * theta
        raw = slices(t)
        pencil = sum(w * m for w, m in zip(weights, raw))
        u_full, _, vt_full = np.linalg.svd(pencil)
        v_full = vt_full.T
        for direct, m in zip(mset.matrices, raw):
            reduced = np.linalg.solve(
                (u_full.T @ pencil @ v_full).T, (u_full.T @ m @ v_full).T
            ).T
            assert np.allclose(reduced, u_full.T @ direct @ u_full, atol=1e-10)

    def test_reduced_rectangular_pipeline_keeps_identity(self):
        rng = np.random.default_rng(6)
        z = rng.standard_normal((6, 3)) + 1.0
        t = tensor_from_components(z)
        theta = unit_theta(6)
        mset, reduction = observable_matrices(t, 3, theta)
        u_d, v_d = reduction
        assert np.allclose(u_d.T @ u_d, np.eye(3), atol=1e-10)
        assert np.allclose(v_d.T @ v_d, np.eye(3), atol=1e-10)
        weights = np.sqrt(6) * theta
        total = sum(w * m for w, m in zip(weights, mset.matrices))
        assert np.allclose(total, np.eye(3), atol=1e-10)


class TestFirstOrderModel:
    def test_matrices_commute(self):
        z = gen_components(4, seed=7)
        noise = gen_tensor(np.zeros((4, 4)), 0.0, 1.0, seed=7)
        m_list, _, _, _ = first_order_model(z, noise)
        for a, b in itertools.combinations(m_list, 2):
            assert np.linalg.norm(a @ b - b @ a) <= 1e-10

    def test_columns_are_joint_eigenvectors(self):
        z = gen_components(3, seed=8)
        noise = gen_tensor(np.zeros((3, 3)), 0.0, 1.0, seed=8)
        m_list, _, _, _ = first_order_model(z, noise)
        col_sums = z.sum(axis=0)
        for n, m in enumerate(m_list):
            assert np.allclose(m @ z, z @ np.diag(z[n] / col_sums), atol=1e-10)

    def test_noise_term_matches_finite_differences(self):
        z = gen_components(4, seed=9)
        rng = np.random.default_rng(9)
        e = rng.standard_normal(64)
        e /= np.linalg.norm(e)
        noise = Tensor3(n=4, data=e)
        m_list, w_list, _, _ = first_order_model(z, noise)
        theta = unit_theta(4)
        residuals = []
        for sigma in (1e-3, 1e-4, 1e-5):
            ground = tensor_from_components(z)
            noisy = Tensor3(n=4, data=np.asarray(ground.data) + sigma * e)
            observed, _ = observable_matrices(noisy, 4, theta)
            residuals.append(
                max(
                    np.linalg.norm((m_hat - m) / sigma - w)
                    for m_hat, m, w in zip(observed.matrices, m_list, w_list)
                )
            )
        # first-order expansion: the residual decays linearly with sigma
        assert residuals[1] <= 0.2 * residuals[0]
        assert residuals[2] <= 0.2 * residuals[1]

    def test_norms_within_stated_bounds(self):
        for seed in range(5):
            z = gen_components(4, seed=seed)
            noise = gen_tensor(np.zeros((4, 4)), 0.0, 1.0, seed=seed)
            m_list, w_list, m_bound, w_bound = first_order_model(z, noise)
            assert max(np.linalg.norm(m, 2) for m in m_list) <= m_bound
            assert max(np.linalg.norm(w, 2) for w in w_list) <= w_bound

    def test_singular_components_rejected(self):
        z = np.ones((3, 3))
        with pytest.raises(SingularZ):
            first_order_model(z, Tensor3(n=3, data=np.zeros(27)))

    def test_zero_column_sum_rejected(self):
        z = np.array([[1.0, 1.0], [-1.0, 2.0]])
        with pytest.raises(ZeroColumnSum):
            first_order_model(z, Tensor3(n=2, data=np.zeros(8)))


def exact_pipeline(z):
    """Noiseless slices -> triangularizer -> ratio matrix for square Z."""
    d = z.shape[0]
    t = tensor_from_components(z)
    mset, _ = observable_matrices(t, d, unit_theta(d))
    beta, _ = find_separating_beta(mset)
    u = schur_initializer(mset, beta)
    return t, mset, u


class TestEstimateComponents:
    def test_exact_recovery_up_to_column_order(self):
        z = gen_components(4, seed=10)
        _, mset, u = exact_pipeline(z)
        y = estimate_components(u, mset)
        reference = z / z.sum(axis=0)
        matched, _ = match_columns(y, reference)
        assert np.allclose(matched, reference, atol=1e-9)

    def test_columns_sum_to_one(self):
        z = gen_components(3, seed=11)
        _, mset, u = exact_pipeline(z)
        y = estimate_components(u, mset)
        assert np.allclose(y.sum(axis=0), 1.0, atol=1e-10)

    def test_one_dimensional_case(self):
        z = np.array([[2.0]])
        t = tensor_from_components(z)
        mset, _ = observable_matrices(t, 1, np.array([1.0]))
        y = estimate_components(np.eye(1), mset)
        assert np.allclose(y, [[1.0]])


class TestRecoverScales:
    def test_identity_fixed_point(self):
        z_star = recover_scales(np.eye(3), np.eye(3), unit_theta(3))
        assert np.allclose(z_star, np.eye(3), atol=1e-12)

    def test_negative_cube_root_is_odd(self):
        z_star = recover_scales(np.diag([-8.0, 1.0]), np.eye(2), unit_theta(2))
        assert np.allclose(np.diag(z_star), [-2.0, 1.0])

    def test_column_scaling_recovered(self):
        z = gen_components(4, seed=12)
        scaled = z.copy()
        scaled[:, 2] *= 1.7
        for target in (z, scaled):
            t, mset, u = exact_pipeline(target)
            theta = unit_theta(4)
            y = estimate_components(u, mset)
            weights = np.sqrt(4) * theta
            pencil = sum(w * m for w, m in zip(weights, slices(t)))
            z_star = recover_scales(pencil, y, theta)
            matched, _ = match_columns(z_star, target)
            assert np.allclose(matched, target, atol=1e-8)


class TestComponentErrorBound:
    def test_zero_noise_gives_zero(self):
        z = gen_components(3, seed=13)
        assert component_error_bound(z, 1.0, 0.0) == 0.0

    def test_constants_match_first_order_norm_bounds(self):
        z = gen_components(4, seed=14)
        eps = 1.0
        rng = np.random.default_rng(14)
        e = rng.standard_normal(64)
        noise = Tensor3(n=4, data=eps * e / np.linalg.norm(e))
        _, _, m_bound, w_bound = first_order_model(z, noise)
        d = 4
        kappa = np.linalg.cond(z)
        gamma = component_gamma(z)
        expected = (
            4.0 * d * 1e-4 * np.sqrt(d * (d - 1)) * kappa**4 / gamma
            * m_bound**2 * w_bound
            + 1e-4 * w_bound
        )
        assert np.isclose(component_error_bound(z, eps, 1e-4), expected)

    def test_identical_columns_are_rejected(self):
        # a repeated column collapses the gap and the rank together
        z = np.column_stack([np.ones(3), np.ones(3), [1.0, 2.0, 3.0]])
        with pytest.raises((DegenerateSpectrum, SingularZ)):
            component_error_bound(z, 1.0, 1e-4)

    def test_gap_alone_vanishing_is_degenerate(self):
        z = gen_components(3, seed=16)
        assert component_gamma(z) > 0
        near = z.copy()
        near[:, 1] = near[:, 0]
        with pytest.raises((DegenerateSpectrum, SingularZ)):
            component_error_bound(near, 1.0, 1e-4)


class TestMatchColumns:
    def test_identity_permutation(self):
        a = np.arange(6.0).reshape(3, 2)
        matched, perm = match_columns(a, a)
        assert perm == (0, 1)
        assert np.array_equal(matched, a)

    def test_recovers_a_shuffle(self):
        rng = np.random.default_rng(15)
        ref = rng.standard_normal((4, 4))
        shuffled = ref[:, [2, 0, 3, 1]]
        matched, _ = match_columns(shuffled, ref)
        assert np.array_equal(matched, ref)
