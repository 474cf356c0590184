import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metasolve.formats import TspInstance
from metasolve.qubo import (
    Graph,
    IsingModel,
    QuboModel,
    Sample,
    SelfLoop,
    TooLarge,
    TooLargeForEncoding,
    brute_force_qubo,
    decode_tsp_sample,
    index_to_bits,
    maxcut_to_qubo,
    qubo_to_ising,
    simulated_annealing,
    tsp_to_qubo,
)
from metasolve.routing import brute_force_tsp

from .oracles import exhaustive_qubo

SQUARE = TspInstance(
    name="square", n=4, edge_weight_kind="euc2d",
    coords=[(0.0, 0.0), (0.0, 10.0), (10.0, 10.0), (10.0, 0.0)],
)


def random_tsp(n: int, seed: int) -> TspInstance:
    rng = random.Random(seed)
    pts = set()
    while len(pts) < n:
        pts.add((rng.randint(0, 40), rng.randint(0, 40)))
    return TspInstance(
        name=f"q{seed}", n=n, edge_weight_kind="euc2d",
        coords=[(float(x), float(y)) for x, y in sorted(pts)],
    )


def random_qubo(n: int, seed: int) -> QuboModel:
    rng = random.Random(seed)
    model = QuboModel(n=n)
    for i in range(n):
        model.add(i, i, rng.uniform(-2, 2))
        for j in range(i + 1, n):
            if rng.random() < 0.6:
                model.add(i, j, rng.uniform(-2, 2))
    return model


class TestBruteForce:
    def test_one_var(self):
        best = brute_force_qubo(QuboModel(n=1, coeffs={(0, 0): -1.0}))
        assert best.bits == (1,)
        assert best.energy == -1.0

    def test_tie_breaks_to_lowest_bitstring(self):
        model = QuboModel(n=2, coeffs={(0, 0): -1.0, (1, 1): -1.0, (0, 1): 2.0})
        best = brute_force_qubo(model)
        assert best.energy == -1.0
        assert best.bits == (0, 1)

    def test_too_large(self):
        with pytest.raises(TooLarge):
            brute_force_qubo(QuboModel(n=21))

    def test_matches_python_enumeration(self):
        model = random_qubo(8, 3)
        _, expected = exhaustive_qubo(8, model.energy)
        assert brute_force_qubo(model).energy == pytest.approx(expected)


class TestIsing:
    def test_single_var_mapping(self):
        ising = qubo_to_ising(QuboModel(n=1, coeffs={(0, 0): -1.0}))
        assert ising.h == [-0.5]
        assert ising.offset == -0.5

    def test_two_var_pointwise_agreement(self):
        model = QuboModel(n=2, coeffs={(0, 0): -1.0, (1, 1): -1.0, (0, 1): 2.0})
        ising = qubo_to_ising(model)
        for bits in itertools.product((0, 1), repeat=2):
            spins = [1 if b else -1 for b in bits]
            assert ising.energy(spins) == pytest.approx(model.energy(bits))

    def test_zero_model(self):
        ising = qubo_to_ising(QuboModel(n=3))
        assert ising.h == [0.0, 0.0, 0.0]
        assert ising.J == {}
        assert ising.offset == 0.0

    @given(st.integers(0, 10_000), st.integers(2, 8))
    @settings(max_examples=80, deadline=None)
    def test_energy_bijection(self, seed, n):
        model = random_qubo(n, seed)
        ising = qubo_to_ising(model)
        for z in range(2**n):
            bits = index_to_bits(z, n)
            spins = [1 if b else -1 for b in bits]
            assert ising.energy(spins) == pytest.approx(model.energy(bits), abs=1e-9)


class TestTspEncoding:
    def test_variable_count(self):
        tri = random_tsp(3, 1)
        model, enc = tsp_to_qubo(tri)
        assert model.n == 4

    def test_square_minimum_decodes_to_optimal_tour(self):
        model, enc = tsp_to_qubo(SQUARE)
        best = brute_force_qubo(model)
        tour = decode_tsp_sample(best.bits, enc)
        assert tour is not None
        assert tour.cost == 40
        assert best.energy == pytest.approx(40.0)

    @pytest.mark.parametrize("seed", range(10))
    def test_minima_are_penalty_free(self, seed):
        inst = random_tsp(4, seed)
        model, enc = tsp_to_qubo(inst, penalty_scale=2.0)
        best = brute_force_qubo(model)
        tour = decode_tsp_sample(best.bits, enc)
        assert tour is not None, "brute-force minimum must satisfy the constraints"
        assert best.energy == pytest.approx(tour.cost)

    def test_ground_energy_equals_tsp_optimum(self):
        for seed in range(5):
            inst = random_tsp(5, 100 + seed)
            model, enc = tsp_to_qubo(inst)
            best = brute_force_qubo(model)
            assert best.energy == pytest.approx(brute_force_tsp(inst).cost)

    def test_identity_assignment_decodes(self):
        model, enc = tsp_to_qubo(SQUARE)
        bits = [0] * model.n
        for p in range(1, 4):
            bits[enc.var(p, p)] = 1
        tour = decode_tsp_sample(tuple(bits), enc)
        assert tour.order == [0, 1, 2, 3]

    def test_all_zero_bits_infeasible(self):
        model, enc = tsp_to_qubo(SQUARE)
        assert decode_tsp_sample((0,) * model.n, enc) is None

    def test_feasible_bits_energy_matches_cost(self):
        model, enc = tsp_to_qubo(SQUARE)
        for perm in itertools.permutations((1, 2, 3)):
            bits = [0] * model.n
            for p, v in enumerate(perm, start=1):
                bits[enc.var(v, p)] = 1
            tour = decode_tsp_sample(tuple(bits), enc)
            assert tour is not None
            assert model.energy(bits) == pytest.approx(tour.cost)

    def test_encoding_cap(self):
        big = random_tsp(40, 0)
        with pytest.raises(TooLargeForEncoding):
            tsp_to_qubo(big)


class TestMaxCut:
    def test_triangle(self):
        graph = Graph(n=3, edges=[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
        model = maxcut_to_qubo(graph)
        best = brute_force_qubo(model)
        assert best.energy == pytest.approx(-2.0)
        assert graph.cut_value(best.bits) == pytest.approx(2.0)

    def test_single_weighted_edge(self):
        graph = Graph(n=2, edges=[(0, 1, 5.0)])
        best = brute_force_qubo(maxcut_to_qubo(graph))
        assert best.energy == pytest.approx(-5.0)
        assert best.bits in {(1, 0), (0, 1)}

    def test_empty_edge_set(self):
        model = maxcut_to_qubo(Graph(n=3, edges=[]))
        assert model.coeffs == {}
        assert brute_force_qubo(model).energy == 0.0

    def test_self_loop_rejected(self):
        with pytest.raises(SelfLoop):
            Graph(n=2, edges=[(1, 1, 1.0)])


class TestSimulatedAnnealing:
    def test_one_var(self):
        best, _ = simulated_annealing(QuboModel(n=1, coeffs={(0, 0): -1.0}), seed=4)
        assert best.bits == (1,)
        assert best.energy == -1.0

    def test_best_not_above_median_trial(self):
        model = random_qubo(12, 9)
        best, trials = simulated_annealing(model, trials=5, seed=7)
        energies = sorted(s.energy for s in trials)
        assert best.energy <= energies[len(energies) // 2]

    def test_energy_matches_recomputation(self):
        model = random_qubo(10, 2)
        best, trials = simulated_annealing(model, seed=3)
        for s in [best, *trials]:
            assert s.energy == pytest.approx(model.energy(s.bits))

    def test_deterministic_given_seed(self):
        model = random_qubo(12, 5)
        a, _ = simulated_annealing(model, seed=11)
        b, _ = simulated_annealing(model, seed=11)
        assert a.bits == b.bits and a.energy == b.energy

    def test_hits_optimum_on_most_seeds(self):
        hits = 0
        for seed in range(50):
            model = random_qubo(12, 1000 + seed)
            optimum = brute_force_qubo(model).energy
            best, _ = simulated_annealing(model, seed=seed)
            assert best.energy >= optimum - 1e-9
            hits += abs(best.energy - optimum) < 1e-9
        assert hits >= 45
