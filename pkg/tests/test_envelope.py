import numpy as np
import pytest

from infopolicy.envelope import (
    bisect_root,
    chord_crossing,
    concave_envelope,
    convex_minorant,
    golden_max,
    split_concave_envelope,
    tangent_from_point,
)


def random_piecewise(rng, n_pieces=6):
    """Random continuous piecewise-linear function with known Lipschitz
    bound; returns (fn, lipschitz)."""
    xs = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0, 1, n_pieces - 1)]))
    ys = rng.uniform(0, 1, len(xs))
    lip = float(np.max(np.abs(np.diff(ys) / np.maximum(np.diff(xs), 1e-9))))

    def fn(x):
        return np.interp(x, xs, ys)

    return fn, lip


class TestConcaveEnvelope:
    def test_affine_is_fixed_point(self):
        env = concave_envelope(lambda x: 2.0 * x + 0.3, 0.0, 1.0, 201)
        assert np.allclose(env.values, 2.0 * env.grid + 0.3, atol=1e-12)
        assert env.contact.all()
        assert env.segments == []

    def test_already_concave_function(self):
        env = concave_envelope(lambda x: np.minimum(x, 1.0 - x), 0.0, 1.0, 201)
        assert np.allclose(env.values, np.minimum(env.grid, 1.0 - env.grid),
                           atol=1e-12)

    def test_v_shape_bridges(self):
        env = concave_envelope(lambda x: np.abs(x - 0.5), 0.0, 1.0, 201)
        assert np.allclose(env.values, 0.5 * np.ones_like(env.grid), atol=1e-12)
        assert env.bridge_at(0.3) == (0.0, 1.0)

    def test_envelope_dominates_and_midpoint_concave(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            fn, _ = random_piecewise(rng)
            env = concave_envelope(fn, 0.0, 1.0, 401)
            assert np.all(env.values >= fn(env.grid) - 1e-10)
            v = env.values
            assert np.all(0.5 * (v[:-2] + v[2:]) <= v[1:-1] + 1e-9)

    def test_idempotence(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            fn, _ = random_piecewise(rng)
            env1 = concave_envelope(fn, 0.0, 1.0, 501)
            env2 = concave_envelope(env1, 0.0, 1.0, 501)
            assert float(np.max(np.abs(env1.values - env2.values))) <= 1e-9

    def test_contact_set_touches_input(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            fn, _ = random_piecewise(rng)
            env = concave_envelope(fn, 0.0, 1.0, 501)
            touched = env.values[env.contact]
            raw = fn(env.grid[env.contact])
            assert np.all(np.abs(touched - raw) <= 1e-8 * (1 + np.abs(raw).max()))

    def test_signal_extraction_soundness(self):
        # splitting a prior across a bridge's contacts reproduces the
        # envelope value
        rng = np.random.default_rng(3)
        for _ in range(20):
            fn, _ = random_piecewise(rng)
            env = concave_envelope(fn, 0.0, 1.0, 801)
            prior = rng.uniform(0.05, 0.95)
            bridge = env.bridge_at(prior)
            if bridge is None:
                continue
            lo, hi = bridge
            w = (hi - prior) / (hi - lo)
            mix = w * fn(lo) + (1 - w) * fn(hi)
            assert mix == pytest.approx(env(prior), abs=1e-8)

    def test_grid_refinement_stability(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            fn, lip = random_piecewise(rng)
            coarse = concave_envelope(fn, 0.0, 1.0, 501)
            fine = concave_envelope(fn, 0.0, 1.0, 1001)
            change = float(np.max(np.abs(coarse.values - fine(coarse.grid))))
            assert change <= 10.0 * lip / 500


class TestConvexMinorant:
    def test_concave_input_gives_chord(self):
        minor = convex_minorant(np.sqrt, 0.0, 1.0, 401)
        assert np.allclose(minor.values, minor.grid, atol=1e-12)

    def test_convex_input_is_fixed_point(self):
        minor = convex_minorant(lambda x: x**2, 0.0, 1.0, 401)
        assert np.allclose(minor.values, minor.grid**2, atol=1e-12)

    def test_below_input(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            fn, _ = random_piecewise(rng)
            minor = convex_minorant(fn, 0.0, 1.0, 401)
            assert np.all(minor.values <= fn(minor.grid) + 1e-10)

    def test_mixed_curve_minorant(self):
        # concave stretch replaced by its chord, convex stretch kept
        fn = lambda x: np.where(x <= 0.5, np.sqrt(2 * x) / 2, 0.5 + (x - 0.5) ** 2 * 2)
        minor = convex_minorant(fn, 0.0, 1.0, 2001)
        v = minor.values
        assert np.all(0.5 * (v[:-2] + v[2:]) >= v[1:-1] - 1e-9)
        assert np.all(v <= fn(minor.grid) + 1e-10)


class TestSplitEnvelope:
    def test_globally_concave_unchanged(self):
        env = split_concave_envelope(np.sqrt, 0.4, 0.0, 1.0, 801)
        for side in (env.left, env.right):
            assert np.allclose(side.values, np.sqrt(side.grid), atol=1e-10)

    def test_split_point_respected(self):
        fn = lambda x: np.abs(x - 0.5)
        env = split_concave_envelope(fn, 0.5, 0.0, 1.0, 801)
        # each side is affine, so nothing is lifted
        xs = np.linspace(0, 1, 101)
        assert np.allclose(env(xs), fn(xs), atol=1e-10)

    def test_lift_only_on_one_side(self):
        fn = lambda x: np.where(x <= 0.5, 0.2 * x, 0.1 + (x - 0.5) ** 2)
        env = split_concave_envelope(fn, 0.5, 0.0, 1.0, 801)
        assert env(0.25) == pytest.approx(fn(0.25), abs=1e-10)
        assert env(0.75) > fn(0.75) + 1e-4


class TestTangent:
    def test_affine_through_anchor_ties_to_far_end(self):
        # constant slope profile: the supremum tie-break picks the far end
        tan = tangent_from_point(lambda x: 0.5 * x, (0.0, 0.0), 0.2, 1.0)
        assert tan.touch == 1.0

    def test_affine_above_anchor_touches_near_end(self):
        tan = tangent_from_point(lambda x: 0.5 * x + 0.1, (0.0, 0.0), 0.2, 1.0)
        assert tan.touch == pytest.approx(0.2, abs=1e-9)

    def test_concave_interior_tangency(self):
        tan = tangent_from_point(np.sqrt, (0.0, 0.25), 0.05, 1.0)
        # maximize (sqrt(t) - 0.25)/t: stationary at sqrt(t) = 0.5
        assert tan.touch == pytest.approx(0.25, abs=1e-6)
        assert tan.slope == pytest.approx(1.0, abs=1e-5)

    def test_tangency_supports_function(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            a = rng.uniform(0.5, 3.0)
            fn = lambda x: 1.0 - np.exp(-a * x)
            y0 = rng.uniform(-0.2, 0.0)
            tan = tangent_from_point(fn, (0.0, y0), 0.1, 1.0)
            xs = np.linspace(0.1, 1.0, 200)
            line = y0 + tan.slope * xs
            assert np.all(line >= fn(xs) - 1e-8)

    def test_minimize_flag_right_anchor(self):
        # anchor right of a concave piece: the support tangent minimizes
        # the as-written slope
        fn = lambda x: 1.0 + np.sqrt(2 * x - x * x)
        tan = tangent_from_point(fn, (1.9, 2.83), 0.0, 1.0, minimize=True)
        xs = np.linspace(0.0, 1.0, 200)
        line = 2.83 + tan.slope * (xs - 1.9)
        assert np.all(line >= fn(xs) - 1e-6)

    def test_degenerate_flat_function(self):
        tan = tangent_from_point(lambda x: 0.7 + 0.0 * x, (0.0, 0.5), 0.3, 1.0)
        assert tan.degenerate


class TestRoots:
    def test_chord_crossing_affine(self):
        root = chord_crossing(lambda x: x, lambda x: 0.25, 0.0, 1.0)
        assert root == pytest.approx(0.25, abs=1e-10)

    def test_chord_crossing_equal_endpoint(self):
        assert chord_crossing(lambda x: x, lambda x: 0.0, 0.0, 1.0) == 0.0

    def test_chord_crossing_none_without_sign_change(self):
        assert chord_crossing(lambda x: x + 2.0, lambda x: 0.0, 0.0, 1.0) is None

    def test_bisect_root_tolerance(self):
        root = bisect_root(lambda x: x**3 - 0.2, 0.0, 1.0, tol=1e-13)
        assert abs(root**3 - 0.2) <= 1e-10

    def test_bisect_requires_bracket(self):
        with pytest.raises(ValueError):
            bisect_root(lambda x: x + 1.0, 0.0, 1.0)

    def test_golden_max(self):
        x, val = golden_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0)
        assert x == pytest.approx(0.3, abs=1e-8)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            concave_envelope(lambda x: np.where(x > 0.5, np.nan, x), 0.0, 1.0, 101)
