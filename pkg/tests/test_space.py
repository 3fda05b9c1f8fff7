import numpy as np
import pytest

from morrey_lab.space import (
    CLOSED,
    OPEN,
    BallSpec,
    IndexOutOfRange,
    InvalidSpaceError,
    ball_measure,
    ball_members,
    breakpoints,
    doubling_ratio,
    find_violations,
    validate_space,
)

from conftest import brute_doubling, line_space, random_space, single_point_space, two_point_space


class TestValidate:
    def test_smallest_nontrivial_metric(self):
        sp = validate_space([[0, 1], [1, 0]], [1, 1])
        assert sp.n == 2
        assert sp.total_mass == 2.0

    def test_asymmetry_reported(self):
        violations = find_violations([[0, 1], [2, 0]], [1, 1])
        assert any(v.kind == "Asymmetry" and v.indices == (0, 1) for v in violations)

    def test_triangle_violation(self):
        dist = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
        violations = find_violations(dist, [1, 1, 1])
        kinds = {(v.kind, v.indices) for v in violations}
        assert ("TriangleViolation", (0, 1, 2)) in kinds

    def test_nonzero_diagonal_and_negative(self):
        violations = find_violations([[1.0, -1.0], [-1.0, 0.0]], [1, 1])
        kinds = {v.kind for v in violations}
        assert "NonzeroDiagonal" in kinds and "NegativeDistance" in kinds

    def test_nonpositive_mass(self):
        violations = find_violations([[0, 1], [1, 0]], [1, 0])
        assert any(v.kind == "NonpositiveMass" and v.indices == (1,) for v in violations)

    def test_invalid_raises_with_all_violations(self):
        with pytest.raises(InvalidSpaceError) as exc:
            validate_space([[0, 1], [2, 0]], [1, -1])
        kinds = {v.kind for v in exc.value.violations}
        assert kinds == {"Asymmetry", "NonpositiveMass"}


class TestBalls:
    def test_closed_boundary_inclusion(self):
        sp = two_point_space()
        assert ball_members(sp, BallSpec(0, 1.0, CLOSED)) == {0, 1}

    def test_open_boundary_exclusion(self):
        sp = two_point_space()
        assert ball_members(sp, BallSpec(0, 1.0, OPEN)) == {0}

    def test_closed_zero_radius_contains_center(self):
        for seed in range(5):
            sp = random_space(seed)
            for x in range(sp.n):
                assert x in ball_members(sp, BallSpec(x, 0.0, CLOSED))

    def test_open_zero_radius_empty(self):
        sp = two_point_space()
        assert ball_members(sp, BallSpec(0, 0.0, OPEN)) == set()
        assert ball_measure(sp, BallSpec(0, 0.0, OPEN)) == 0.0

    def test_measure_sums_atoms(self):
        sp = two_point_space(masses=(1.0, 2.0))
        assert ball_measure(sp, BallSpec(0, 1.0, CLOSED)) == 3.0

    def test_single_point_whole_space(self):
        sp = single_point_space(mass=0.7)
        assert ball_measure(sp, BallSpec(0, 5.0, CLOSED)) == 0.7

    def test_index_out_of_range(self):
        sp = two_point_space()
        with pytest.raises(IndexOutOfRange):
            ball_members(sp, BallSpec(5, 1.0, CLOSED))

    def test_monotonicity_in_radius(self):
        for seed in range(10):
            sp = random_space(seed)
            x = seed % sp.n
            radii = np.sort(np.random.default_rng(seed).uniform(0, 2.5, size=8))
            for closure in (OPEN, CLOSED):
                prev = set()
                for r in radii:
                    cur = ball_members(sp, BallSpec(x, float(r), closure))
                    assert prev <= cur
                    prev = cur


class TestBreakpoints:
    def test_line_endpoint(self):
        sp = line_space([0.0, 1.0, 2.0])
        assert breakpoints(sp, 0).tolist() == [0.0, 1.0, 2.0]

    def test_single_point(self):
        assert breakpoints(single_point_space(), 0).tolist() == [0.0]

    def test_deduplication(self):
        sp = line_space([-1.0, 0.0, 1.0])
        assert breakpoints(sp, 1).tolist() == [0.0, 1.0]

    def test_right_limit_identity(self):
        # closed ball at a breakpoint = intersection of open balls just above
        for seed in range(10):
            sp = random_space(seed)
            for x in range(sp.n):
                bp = breakpoints(sp, x)
                gaps = np.diff(bp)
                g = float(gaps.min()) / 2.0 if gaps.size else 0.5
                for rho in bp:
                    closed = ball_members(sp, BallSpec(x, float(rho), CLOSED))
                    inter = None
                    for eps in (g, g / 10.0, g / 100.0):
                        members = ball_members(sp, BallSpec(x, float(rho) + eps, OPEN))
                        inter = members if inter is None else inter & members
                    assert inter == closed


class TestDoubling:
    def test_single_point(self):
        ratio, _ = doubling_ratio(single_point_space())
        assert ratio == 1.0

    def test_two_point_witness(self):
        ratio, (x, c) = doubling_ratio(two_point_space())
        assert ratio == 2.0
        assert c == 0.5

    def test_gaussian_line_is_non_doubling(self):
        # 1D grid on [-10, 10], n=256, Gaussian masses
        n = 256
        h = 20.0 / n
        coords = -10.0 + h * (np.arange(n) + 0.5)
        sp = line_space(coords, h * np.exp(-(coords**2)))
        ratio, _ = doubling_ratio(sp)
        assert ratio > 10.0
        assert ratio == pytest.approx(brute_doubling(sp, count=2000), rel=1e-12)

    def test_matches_brute_force(self):
        for seed in range(20):
            sp = random_space(seed)
            ratio, _ = doubling_ratio(sp)
            brute = brute_doubling(sp)
            assert brute <= ratio * (1 + 1e-12)
            assert ratio == pytest.approx(brute, rel=1e-12)


class TestEngulfing:
    def test_doubled_ball_engulfs(self):
        # B(c, rho) centered inside B(a, r) and reaching past B(a, 3r)
        # must contain B(a, r) once its radius is doubled.
        for seed in range(8):
            sp = random_space(seed, n=10)
            checked = 0
            for a in range(sp.n):
                for rb in breakpoints(sp, a):
                    for mult in (0.5, 1.0, 1.5):
                        r = float(rb) * mult
                        if r <= 0:
                            continue
                        inner = ball_members(sp, BallSpec(a, r, OPEN))
                        outer3 = ball_members(sp, BallSpec(a, 3 * r, OPEN))
                        far = set(range(sp.n)) - outer3
                        if not inner or not far:
                            continue
                        for c in inner:
                            for rho_b in breakpoints(sp, c):
                                for m2 in (0.5, 1.0, 1.5):
                                    rho = float(rho_b) * m2
                                    ball = ball_members(sp, BallSpec(c, rho, OPEN))
                                    if not (ball & far):
                                        continue
                                    doubled = ball_members(sp, BallSpec(c, 2 * rho, OPEN))
                                    assert inner <= doubled
                                    checked += 1
            assert checked > 0
