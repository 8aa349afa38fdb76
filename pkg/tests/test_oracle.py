import numpy as np

from rotaug import mirror_matrix, pure_rotation_homography, realign_principal_point
from rotaug.oracle import (
    brute_force_affine_check,
    check_canvas_containment,
    check_cuboid_consistency,
    check_projective_consistency,
    random_orthogonal,
    selfcheck_report,
)

from conftest import compose_euler, random_pose


def residual_for(op, k_vga, trials=20000, seed=0, corrupt=None):
    canvas = realign_principal_point(k_vga, 640, 480, op)
    h = pure_rotation_homography(canvas.k, op, k_vga)
    if corrupt is not None:
        h = h.copy()
        h[corrupt] += 1e-3
    return check_projective_consistency(
        h, k_vga, 640, 480, op, canvas.k, canvas.width, canvas.height,
        trials=trials, seed=seed,
    )


class TestProjectiveOracle:
    def test_identity_operator(self, k_vga):
        res = residual_for(np.eye(3), k_vga)
        assert res.accepted > 10000
        assert res.max_residual_px <= 1e-9

    def test_random_operators_stay_subpixel(self, k_vga):
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(10):
            op = compose_euler(*rng.uniform(-1, 1, 3) * [10, 5, 5])
            if rng.random() < 0.5:
                op = mirror_matrix("x").m @ op
            res = residual_for(op, k_vga, trials=100_000, seed=int(rng.integers(2**31)))
            assert res.accepted > 50_000
            worst = max(worst, res.max_residual_px)
        assert worst <= 1e-6

    def test_corrupted_homography_is_flagged(self, k_vga):
        op = compose_euler(6, -2, 3)
        res = residual_for(op, k_vga, corrupt=(0, 0))
        assert res.max_residual_px > 0.1

    def test_report_echoes_seed(self, k_vga):
        res = residual_for(np.eye(3), k_vga, seed=123)
        assert res.seed == 123
        again = residual_for(np.eye(3), k_vga, seed=123)
        assert res.max_residual_px == again.max_residual_px


class TestCuboidOracle:
    def test_identity_is_exact(self):
        pose = random_pose(np.random.default_rng(0))
        assert check_cuboid_consistency(pose, np.eye(3)) == 0.0

    def test_rotation_only(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            res = check_cuboid_consistency(
                random_pose(rng), random_orthogonal(rng, proper=True)
            )
            assert res <= 1e-12

    def test_mirror_both_flavors(self):
        rng = np.random.default_rng(2)
        m = mirror_matrix("x").m
        for _ in range(50):
            pose = random_pose(rng)
            assert check_cuboid_consistency(pose, m, keep_chirality=False) <= 1e-12
            assert check_cuboid_consistency(pose, m, keep_chirality=True) <= 1e-12

    def test_composed_mirror_rotation(self):
        rng = np.random.default_rng(3)
        m = mirror_matrix("x").m
        for _ in range(20):
            op = m @ random_orthogonal(rng, proper=True)
            pose = random_pose(rng)
            assert check_cuboid_consistency(pose, op, keep_chirality=True, mirror=m) <= 1e-12


class TestAffineOracle:
    def test_uniform_scaling_agrees_accept(self):
        res = brute_force_affine_check(2.5 * np.eye(3), samples=300)
        assert res.agrees and res.closed_form_accepts and res.brute_force_accepts

    def test_non_uniform_diagonal_agrees_reject(self):
        res = brute_force_affine_check(np.diag([1.0, 2.0, 1.0]), samples=300)
        assert res.agrees
        assert not res.closed_form_accepts
        assert not res.brute_force_accepts

    def test_random_matrices_never_disagree(self):
        rng = np.random.default_rng(4)
        for i in range(40):
            if i % 2 == 0:
                a = float(rng.uniform(0.3, 3.0)) * random_orthogonal(rng)
            else:
                a = rng.normal(size=(3, 3))
                while abs(np.linalg.det(a)) < 0.1:
                    a = rng.normal(size=(3, 3))
            assert brute_force_affine_check(a, samples=150, seed=i).agrees

    def test_orthogonal_sampler_hits_both_components(self):
        rng = np.random.default_rng(5)
        dets = {round(float(np.linalg.det(random_orthogonal(rng)))) for _ in range(50)}
        assert dets == {-1, 1}
        for _ in range(20):
            q = random_orthogonal(rng)
            assert np.max(np.abs(q.T @ q - np.eye(3))) < 1e-12


class TestCanvasOracle:
    def test_no_overflow_for_sampled_operators(self, k_vga):
        rng = np.random.default_rng(6)
        for _ in range(20):
            op = compose_euler(*rng.uniform(-1, 1, 3) * [10, 5, 5])
            canvas = realign_principal_point(k_vga, 640, 480, op)
            assert check_canvas_containment(k_vga, 640, 480, op, canvas) <= 0.0


class TestSelfcheck:
    def test_report_is_ok_and_detects_canary(self):
        report = selfcheck_report(seed=1, operators=6, trials_per_operator=5000, affine_samples=8)
        assert report["ok"]
        assert report["canary_detected"]
        assert report["max_pixel_residual"] <= 1e-6
        assert report["affine_disagreements"] == 0
