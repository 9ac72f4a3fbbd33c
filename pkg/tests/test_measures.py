import itertools
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from deltachain.builders import circle_doubling, random_metric
from deltachain.chain import build_chain_graph, is_delta_chain, mixing_certificate
from deltachain.core import FiniteTrajectory
from deltachain.errors import DegenerateWeights, EmptySet, SchemaError
from deltachain.measures import (
    FiniteMeasure,
    MarkovMeasure,
    PeriodicOrbitMeasure,
    empirical_measure,
    ergodic_measures_of_graph,
    hausdorff_distance,
    mixture_cylinders,
    pi_bar_mixture_upper,
    pi_bar_periodic,
    rho_bar_markov_upper,
    rho_bar_periodic,
    sigmund_approximation,
    w1_distance,
    weakstar_proxy,
)


def orbit_coupling_lp(wp, wq, cost):
    """Independent reference for the d-bar value between periodic orbits.

    Minimizes expected cost over joint distributions on positions (i, j)
    that are invariant under the simultaneous +1 shift and have uniform
    marginals.  No phase formula is used anywhere here.
    """
    p, q = len(wp), len(wq)
    cost = np.asarray(cost, dtype=float)
    nvars = p * q

    def var(i, j):
        return i * q + j

    rows, cols, data, b_eq = [], [], [], []
    r = 0
    # shift invariance
    for i in range(p):
        for j in range(q):
            rows += [r, r]
            cols += [var(i, j), var((i + 1) % p, (j + 1) % q)]
            data += [1.0, -1.0]
            b_eq.append(0.0)
            r += 1
    # marginals (last column dropped as redundant)
    for i in range(p):
        for j in range(q):
            rows.append(r)
            cols.append(var(i, j))
            data.append(1.0)
        b_eq.append(1.0 / p)
        r += 1
    for j in range(q - 1):
        for i in range(p):
            rows.append(r)
            cols.append(var(i, j))
            data.append(1.0)
        b_eq.append(1.0 / q)
        r += 1
    from scipy.sparse import coo_matrix

    a_eq = coo_matrix((data, (rows, cols)), shape=(r, nvars))
    c = np.array([cost[wp[i], wq[j]] for i in range(p) for j in range(q)])
    res = linprog(c, A_eq=a_eq, b_eq=np.array(b_eq), bounds=(0, None), method="highs")
    assert res.success
    return float(res.fun)


class TestFiniteMeasure:
    def test_accepts_probability_vector(self):
        m = FiniteMeasure([0.25, 0.75])
        assert m.weights.sum() == 1.0

    def test_rejects_negative(self):
        with pytest.raises(SchemaError):
            FiniteMeasure([1.5, -0.5])

    def test_rejects_unnormalized(self):
        with pytest.raises(SchemaError):
            FiniteMeasure([0.5, 0.6])


class TestPeriodicOrbitMeasure:
    def test_canonical_primitive(self):
        assert PeriodicOrbitMeasure((0, 1, 0, 1)).word == (0, 1)

    def test_canonical_rotation(self):
        assert PeriodicOrbitMeasure((2, 0, 1)).word == (0, 1, 2)

    def test_rotations_compare_equal(self):
        a = PeriodicOrbitMeasure((3, 1, 2))
        b = PeriodicOrbitMeasure((1, 2, 3))
        assert a == b

    def test_length_one_marginal(self):
        m = PeriodicOrbitMeasure((0, 0, 2))
        marg = m.length_one_marginal(4)
        assert marg.weights.tolist() == pytest.approx([2 / 3, 0.0, 1 / 3, 0.0])


class TestMarkovMeasure:
    def test_from_periodic_is_cyclic(self):
        pm = PeriodicOrbitMeasure((0, 1, 2))
        mm = MarkovMeasure.from_periodic(pm)
        assert mm.n == 3
        assert mm.kernel[0, 1] == 1.0 and mm.kernel[2, 0] == 1.0
        assert mm.stationary.tolist() == pytest.approx([1 / 3] * 3)

    def test_rejects_non_stochastic(self):
        with pytest.raises(SchemaError):
            MarkovMeasure(np.array([[0.5, 0.4], [0.0, 1.0]]), np.array([0.5, 0.5]))

    def test_rejects_non_stationary(self):
        kernel = np.array([[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(SchemaError):
            MarkovMeasure(kernel, np.array([0.9, 0.1]))


class TestW1Distance:
    def test_point_mass_to_uniform(self):
        cost = np.array([[0.0, 1.0], [1.0, 0.0]])
        res = w1_distance(np.array([1.0, 0.0]), np.array([0.5, 0.5]), cost)
        assert res.value == pytest.approx(0.5)

    def test_symmetry_and_identity(self):
        rng = np.random.default_rng(0)
        sys = random_metric(6, seed=1)
        for _ in range(10):
            a = rng.dirichlet(np.ones(6))
            b = rng.dirichlet(np.ones(6))
            ab = w1_distance(a, b, sys.dist).value
            ba = w1_distance(b, a, sys.dist.T).value
            assert ab == pytest.approx(ba, abs=1e-9)
            assert w1_distance(a, a, sys.dist).value == pytest.approx(0.0, abs=1e-9)

    def test_line_metric_matches_cdf_formula(self):
        # on the line, W1 is the L1 distance between the CDFs
        rng = np.random.default_rng(1)
        pts = np.sort(rng.uniform(0, 1, 5))
        cost = np.abs(np.subtract.outer(pts, pts))
        for _ in range(20):
            a = rng.dirichlet(np.ones(5))
            b = rng.dirichlet(np.ones(5))
            res = w1_distance(a, b, cost)
            cdf_gap = np.cumsum(a - b)[:-1]
            expected = float(np.sum(np.abs(cdf_gap) * np.diff(pts)))
            assert res.value == pytest.approx(expected, abs=1e-9)

    def test_plan_marginals(self):
        rng = np.random.default_rng(2)
        sys = random_metric(5, seed=3)
        a = rng.dirichlet(np.ones(5))
        b = rng.dirichlet(np.ones(5))
        res = w1_distance(a, b, sys.dist)
        assert np.allclose(res.plan.sum(axis=1), a, atol=1e-9)
        assert np.allclose(res.plan.sum(axis=0), b, atol=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(SchemaError):
            w1_distance(np.array([1.0]), np.array([1.0]), np.zeros((2, 2)))


class TestRhoBarPeriodic:
    def test_two_symbol_example(self):
        cost = np.array([[0.0, 1.0], [1.0, 0.0]])
        value, phase = rho_bar_periodic(
            PeriodicOrbitMeasure((0, 1)), PeriodicOrbitMeasure((0, 0, 1)), cost
        )
        assert value == pytest.approx(0.5)
        assert phase == 0

    def test_equal_orbits_zero(self):
        sys = circle_doubling(8)
        pm = PeriodicOrbitMeasure((1, 2, 4))
        value, _ = rho_bar_periodic(pm, pm, sys.dist)
        assert value == 0.0

    def test_matches_coupling_lp_random(self):
        sys = random_metric(5, seed=7)
        rng = np.random.default_rng(3)
        for _ in range(30):
            p = int(rng.integers(1, 5))
            q = int(rng.integers(1, 5))
            wp = tuple(int(v) for v in rng.integers(0, 5, p))
            wq = tuple(int(v) for v in rng.integers(0, 5, q))
            pm, qm = PeriodicOrbitMeasure(wp), PeriodicOrbitMeasure(wq)
            value, _ = rho_bar_periodic(pm, qm, sys.dist)
            oracle = orbit_coupling_lp(pm.word, qm.word, sys.dist)
            assert value == pytest.approx(oracle, abs=1e-9)

    def test_triangle_inequality(self):
        sys = random_metric(4, seed=11)
        words = [(0,), (1, 2), (0, 3), (2, 2, 3), (1,)]
        ms = [PeriodicOrbitMeasure(w) for w in words]
        for a, b, c in itertools.permutations(ms, 3):
            ab, _ = rho_bar_periodic(a, b, sys.dist)
            bc, _ = rho_bar_periodic(b, c, sys.dist)
            ac, _ = rho_bar_periodic(a, c, sys.dist)
            assert ac <= ab + bc + 1e-12


class TestPiBarPeriodic:
    def test_fixed_points(self):
        sys = circle_doubling(4)
        value, phase, tail = pi_bar_periodic(
            PeriodicOrbitMeasure((0,)), PeriodicOrbitMeasure((2,)), sys, 8
        )
        assert value == pytest.approx(0.5)  # center coordinate dominates
        assert tail == pytest.approx(0.1)

    def test_floor_at_tail(self):
        sys = circle_doubling(4)
        pm = PeriodicOrbitMeasure((0,))
        value, _, tail = pi_bar_periodic(pm, pm, sys, 8)
        assert value == pytest.approx(tail)

    def test_dominates_rho_bar(self):
        # pi >= min(rho at center, 1), so pi_bar >= rho_bar when rho <= 1
        sys = random_metric(6, seed=13)
        rng = np.random.default_rng(4)
        for _ in range(15):
            wp = tuple(int(v) for v in rng.integers(0, 6, int(rng.integers(1, 5))))
            wq = tuple(int(v) for v in rng.integers(0, 6, int(rng.integers(1, 5))))
            pm, qm = PeriodicOrbitMeasure(wp), PeriodicOrbitMeasure(wq)
            rho_val, _ = rho_bar_periodic(pm, qm, sys.dist)
            pi_val, _, _ = pi_bar_periodic(pm, qm, sys, 8)
            assert pi_val >= rho_val - 1e-12

    def test_radius_tightens_monotonically(self):
        sys = random_metric(6, seed=17)
        pm = PeriodicOrbitMeasure((0, 3, 5))
        qm = PeriodicOrbitMeasure((1, 4))
        prev = None
        for radius in (2, 4, 8, 16):
            value, _, tail = pi_bar_periodic(pm, qm, sys, radius)
            if prev is not None:
                # larger radius only refines terms that sat at the old tail
                assert value <= prev + 1e-12
            prev = value


class TestRhoBarMarkovUpper:
    def test_deterministic_encodings_match_periodic(self):
        sys = random_metric(5, seed=19)
        rng = np.random.default_rng(5)
        for _ in range(10):
            wp = tuple(int(v) for v in rng.integers(0, 5, int(rng.integers(1, 4))))
            wq = tuple(int(v) for v in rng.integers(0, 5, int(rng.integers(1, 4))))
            pm, qm = PeriodicOrbitMeasure(wp), PeriodicOrbitMeasure(wq)
            mu = MarkovMeasure.from_periodic(pm)
            nu = MarkovMeasure.from_periodic(qm)
            cost = sys.dist[np.array(pm.word)[:, None], np.array(qm.word)[None, :]]
            res = rho_bar_markov_upper(mu, nu, cost)
            value, _ = rho_bar_periodic(pm, qm, sys.dist)
            assert res.value == pytest.approx(value, abs=1e-9)

    def test_lower_bound_below_value(self):
        sys = random_metric(4, seed=23)
        pm = PeriodicOrbitMeasure((0, 1))
        qm = PeriodicOrbitMeasure((2, 3, 3))
        mu = MarkovMeasure.from_periodic(pm)
        nu = MarkovMeasure.from_periodic(qm)
        cost = sys.dist[np.array(pm.word)[:, None], np.array(qm.word)[None, :]]
        res = rho_bar_markov_upper(mu, nu, cost)
        assert res.lower_bound <= res.value + 1e-9


class TestHausdorff:
    def test_hand_case(self):
        a = [0.0, 1.0]
        b = [0.4]
        d = lambda x, y: abs(x - y)
        assert hausdorff_distance(a, b, d) == pytest.approx(0.6)

    def test_subset_one_sided(self):
        a = [0.0, 0.5, 1.0]
        b = [0.0, 1.0]
        d = lambda x, y: abs(x - y)
        assert hausdorff_distance(a, b, d) == pytest.approx(0.5)

    def test_empty_raises(self):
        with pytest.raises(EmptySet):
            hausdorff_distance([], [1], lambda x, y: 0.0)


def oracle_cycles(adjacency, max_period):
    """Brute force: all cyclic words up to max_period, deduped by orbit."""
    n = adjacency.shape[0]
    seen = set()
    for length in range(1, max_period + 1):
        for word in itertools.product(range(n), repeat=length):
            if len(set(word)) != len(word):
                continue  # simple cycles only
            if all(adjacency[word[i], word[(i + 1) % length]] for i in range(length)):
                canon = min(word[i:] + word[:i] for i in range(length))
                seen.add(canon)
    return seen


class TestErgodicEnumeration:
    def test_grid4_fixed_points(self):
        g = build_chain_graph(circle_doubling(4), 0.25)
        measures, truncated = ergodic_measures_of_graph(g, 1)
        assert not truncated
        assert sorted(m.word for m in measures) == [(0,), (1,), (3,)]

    def test_matches_brute_force(self):
        for seed in range(6):
            sys = random_metric(6, seed=seed)
            for delta in (0.3, 0.5):
                g = build_chain_graph(sys, delta)
                measures, truncated = ergodic_measures_of_graph(g, 4)
                assert not truncated
                got = {m.word for m in measures}
                assert got == oracle_cycles(g.adjacency, 4)

    def test_truncation_flag(self):
        g = build_chain_graph(circle_doubling(8), 1.0)  # complete graph
        measures, truncated = ergodic_measures_of_graph(g, 4, cap=10)
        assert truncated
        assert len(measures) == 10

    def test_truncation_prefix_deterministic(self):
        g = build_chain_graph(circle_doubling(8), 1.0)
        short, _ = ergodic_measures_of_graph(g, 4, cap=10)
        longer, _ = ergodic_measures_of_graph(g, 4, cap=25)
        assert [m.word for m in longer[:10]] == [m.word for m in short]


class TestSigmund:
    def test_single_component_identity(self):
        g = build_chain_graph(circle_doubling(15), 0.2)
        pm = PeriodicOrbitMeasure((0,))
        assert sigmund_approximation([(pm, 1.0)], g, 32) == pm

    def test_word_is_cyclic_chain(self):
        sys = circle_doubling(15)
        g = build_chain_graph(sys, 0.2)
        target = [
            (PeriodicOrbitMeasure((0,)), 0.5),
            (PeriodicOrbitMeasure((5, 10)), 0.5),
        ]
        approx = sigmund_approximation(target, g, 64)
        closed = FiniteTrajectory(list(approx.word) + [approx.word[0]], origin=0)
        assert is_delta_chain(closed, g)

    def test_marginal_converges_to_mixture(self):
        sys = circle_doubling(15)
        g = build_chain_graph(sys, 0.2)
        target = [
            (PeriodicOrbitMeasure((0,)), 0.5),
            (PeriodicOrbitMeasure((5, 10)), 0.5),
        ]
        want = np.zeros(15)
        want[0] = 0.5
        want[5] = want[10] = 0.25
        gaps = []
        for L in (16, 64, 256):
            approx = sigmund_approximation(target, g, L)
            got = approx.length_one_marginal(15).weights
            gaps.append(float(np.abs(got - want).sum()))
        assert gaps[-1] < gaps[0]
        assert gaps[-1] < 0.05

    def test_degenerate_weight_raises(self):
        g = build_chain_graph(circle_doubling(15), 0.2)
        target = [
            (PeriodicOrbitMeasure((0,)), 0.999),
            (PeriodicOrbitMeasure((5, 10)), 0.001),
        ]
        with pytest.raises(DegenerateWeights):
            sigmund_approximation(target, g, 8)


class TestCylinders:
    def test_empirical_hand_case(self):
        cyl = empirical_measure(PeriodicOrbitMeasure((0, 1)), 2)
        assert cyl[1] == {(0,): 0.5, (1,): 0.5}
        assert cyl[2] == {(0, 1): 0.5, (1, 0): 0.5}

    def test_mixture_combines(self):
        mix = [
            (PeriodicOrbitMeasure((0,)), 0.25),
            (PeriodicOrbitMeasure((1,)), 0.75),
        ]
        cyl = mixture_cylinders(mix, 1)
        assert cyl[1] == {(0,): 0.25, (1,): 0.75}

    def test_weakstar_zero_on_equal(self):
        sys = circle_doubling(4)
        cyl = empirical_measure(PeriodicOrbitMeasure((0, 1)), 3)
        assert weakstar_proxy(cyl, cyl, 3, sys) == pytest.approx(0.0, abs=1e-9)

    def test_weakstar_hand_value(self):
        sys = circle_doubling(4)
        a = empirical_measure(PeriodicOrbitMeasure((0,)), 1)
        b = empirical_measure(PeriodicOrbitMeasure((2,)), 1)
        # single depth: 2^-1 * W1(delta_0, delta_2) = 0.5 * 0.5
        assert weakstar_proxy(a, b, 1, sys) == pytest.approx(0.25)

    def test_weakstar_symmetry(self):
        sys = random_metric(5, seed=29)
        a = empirical_measure(PeriodicOrbitMeasure((0, 2, 4)), 3)
        b = empirical_measure(PeriodicOrbitMeasure((1, 3)), 3)
        assert weakstar_proxy(a, b, 3, sys) == pytest.approx(
            weakstar_proxy(b, a, 3, sys), abs=1e-9
        )


class TestPiBarMixture:
    def test_trivial_mixture_equals_pairwise(self):
        sys = circle_doubling(4)
        pm = PeriodicOrbitMeasure((0,))
        qm = PeriodicOrbitMeasure((2,))
        upper = pi_bar_mixture_upper([(pm, 1.0)], [(qm, 1.0)], sys, 8)
        value, _, _ = pi_bar_periodic(pm, qm, sys, 8)
        assert upper == pytest.approx(value)

    def test_weighted_average(self):
        sys = circle_doubling(4)
        p0 = PeriodicOrbitMeasure((0,))
        p1 = PeriodicOrbitMeasure((1,))
        q = PeriodicOrbitMeasure((2,))
        upper = pi_bar_mixture_upper([(p0, 0.5), (p1, 0.5)], [(q, 1.0)], sys, 8)
        v0, _, _ = pi_bar_periodic(p0, q, sys, 8)
        v1, _, _ = pi_bar_periodic(p1, q, sys, 8)
        assert upper == pytest.approx(0.5 * v0 + 0.5 * v1)
