"""QUBO and Ising models, problem reformulations, and samplers.

Conventions used throughout:

* QUBO energy: ``E(x) = sum_{i<=j} Q[i,j] x_i x_j + offset`` with x in {0,1}.
* Ising energy: ``E(s) = sum_i h_i s_i + sum_{i<j} J[i,j] s_i s_j + offset``
  with s in {-1,+1}; bit 1 maps to spin +1.
* Bitstrings are tuples ``(x_0, ..., x_{n-1})``; when enumerated as integers,
  x_0 is the most significant bit, so "lowest bitstring" ties break exactly
  like the integer order of the written-out string.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .formats import TspInstance
    from .routing import Tour


class TooLarge(ValueError):
    pass


class TooLargeForEncoding(ValueError):
    pass


class SelfLoop(ValueError):
    pass


BRUTE_FORCE_CAP = 20
ENCODING_CAP = 1024  # variables; statevector feasibility is enforced per backend


@dataclass
class QuboModel:
    n: int
    coeffs: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        for (i, j) in self.coeffs:
            if not (0 <= i <= j < self.n):
                raise ValueError(f"coefficient index ({i}, {j}) invalid for n={self.n}")

    def add(self, i: int, j: int, value: float) -> None:
        key = (i, j) if i <= j else (j, i)
        self.coeffs[key] = self.coeffs.get(key, 0.0) + value

    def energy(self, bits) -> float:
        total = self.offset
        for (i, j), q in self.coeffs.items():
            if bits[i] and bits[j]:
                total += q
        return total


@dataclass
class IsingModel:
    n: int
    h: list[float]
    J: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def energy(self, spins) -> float:
        total = self.offset + sum(hi * si for hi, si in zip(self.h, spins))
        for (i, j), jij in self.J.items():
            total += jij * spins[i] * spins[j]
        return total


@dataclass
class Sample:
    bits: tuple[int, ...]
    energy: float
    count: int = 1


def bits_to_index(bits) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def index_to_bits(z: int, n: int) -> tuple[int, ...]:
    return tuple((z >> (n - 1 - i)) & 1 for i in range(n))


def energy_table(model: QuboModel) -> np.ndarray:
    """Energies of all 2^n states, indexed MSB-first. Exponential in n."""
    n = model.n
    states = np.arange(2**n, dtype=np.int64)
    table = np.full(2**n, model.offset, dtype=np.float64)
    bit = {}
    for i in range(n):
        bit[i] = ((states >> (n - 1 - i)) & 1).astype(np.float64)
    for (i, j), q in model.coeffs.items():
        table += q * (bit[i] if i == j else bit[i] * bit[j])
    return table


def brute_force_qubo(model: QuboModel) -> Sample:
    """Exact minimum over all 2^n states; ties break to the lowest bitstring."""
    if model.n > BRUTE_FORCE_CAP:
        raise TooLarge(f"brute force capped at {BRUTE_FORCE_CAP} variables, got {model.n}")
    table = energy_table(model)
    z = int(np.argmin(table))  # argmin returns the first (lowest) index on ties
    return Sample(bits=index_to_bits(z, model.n), energy=float(table[z]), count=1)


def qubo_to_ising(model: QuboModel) -> IsingModel:
    """Substitute x_i = (1 + s_i) / 2; energies agree pointwise."""
    h = [0.0] * model.n
    J: dict[tuple[int, int], float] = {}
    offset = model.offset
    for (i, j), q in model.coeffs.items():
        if i == j:
            offset += q / 2.0
            h[i] += q / 2.0
        else:
            offset += q / 4.0
            h[i] += q / 4.0
            h[j] += q / 4.0
            J[(i, j)] = J.get((i, j), 0.0) + q / 4.0
    return IsingModel(n=model.n, h=h, J=J, offset=offset)


@dataclass
class TspEncoding:
    """Decoder context for the position-based TSP encoding.

    City 0 is pinned to tour position 0; variable (v, p) for v, p in
    1..n-1 means "city v sits at position p", laid out row-major.
    """

    instance: "TspInstance"
    n: int
    penalty: float

    def var(self, v: int, p: int) -> int:
        return (v - 1) * (self.n - 1) + (p - 1)


def tsp_to_qubo(instance: "TspInstance", penalty_scale: float = 2.0) -> tuple[QuboModel, TspEncoding]:
    """Position encoding of a TSP into a QUBO with (n-1)^2 variables.

    The distance term carries weight 1 so feasible assignments score exactly
    their tour cost; one-city-per-position and one-position-per-city penalties
    carry weight ``penalty_scale * max_distance``.
    """
    from .formats import distance_matrix

    n = instance.n
    # n=2 degenerates to a single variable; clustering produces such subs
    if n < 2:
        raise ValueError("TSP encoding needs at least 2 cities")
    num_vars = (n - 1) * (n - 1)
    if num_vars > ENCODING_CAP:
        raise TooLargeForEncoding(
            f"encoding needs {num_vars} variables, cap is {ENCODING_CAP}"
        )
    matrix = distance_matrix(instance)
    max_d = max(max(row) for row in matrix)
    penalty = penalty_scale * max_d

    model = QuboModel(n=num_vars)
    enc = TspEncoding(instance=instance, n=n, penalty=penalty)

    # distance terms along the cycle 0 -> p1 -> ... -> p_{n-1} -> 0
    for v in range(1, n):
        model.add(enc.var(v, 1), enc.var(v, 1), float(matrix[0][v]))
        model.add(enc.var(v, n - 1), enc.var(v, n - 1), float(matrix[v][0]))
    for p in range(1, n - 1):
        for u in range(1, n):
            for v in range(1, n):
                if u == v:
                    continue
                model.add(enc.var(u, p), enc.var(v, p + 1), float(matrix[u][v]))

    # exactly-one constraints: (1 - sum x)^2 = 1 - sum x + 2 sum_{a<b} x_a x_b
    groups = [[enc.var(v, p) for v in range(1, n)] for p in range(1, n)]
    groups += [[enc.var(v, p) for p in range(1, n)] for v in range(1, n)]
    for group in groups:
        model.offset += penalty
        for a_idx, a in enumerate(group):
            model.add(a, a, -penalty)
            for b in group[a_idx + 1 :]:
                model.add(a, b, 2.0 * penalty)
    return model, enc


def decode_tsp_sample(bits, enc: TspEncoding) -> "Tour | None":
    """Rebuild the tour from the position matrix; None when infeasible."""
    from .routing import Tour, tour_cost
    from .formats import distance_matrix

    n = enc.n
    if len(bits) != (n - 1) * (n - 1):
        raise ValueError(f"expected {(n - 1) ** 2} bits, got {len(bits)}")
    order = [0]
    for p in range(1, n):
        cities = [v for v in range(1, n) if bits[enc.var(v, p)]]
        if len(cities) != 1:
            return None
        order.append(cities[0])
    if len(set(order)) != n:
        return None
    matrix = distance_matrix(enc.instance)
    return Tour(order=order, cost=tour_cost(matrix, order))


@dataclass
class Graph:
    """Undirected weighted graph for MaxCut."""

    n: int
    edges: list[tuple[int, int, float]]

    def __post_init__(self):
        for u, v, w in self.edges:
            if u == v:
                raise SelfLoop(f"self loop on node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            if not math.isfinite(w):
                raise ValueError("edge weights must be finite")

    def cut_value(self, bits) -> float:
        return sum(w for u, v, w in self.edges if bits[u] != bits[v])


def maxcut_to_qubo(graph: Graph) -> QuboModel:
    """Minimizing the QUBO maximizes the cut; cut value = -energy."""
    model = QuboModel(n=graph.n)
    for u, v, w in graph.edges:
        model.add(u, u, -w)
        model.add(v, v, -w)
        model.add(u, v, 2.0 * w)
    return model


DEFAULT_SWEEPS = 100
DEFAULT_BETA_RANGE = (0.1, 10.0)
DEFAULT_TRIALS = 10


def geometric_betas(start: float, stop: float, count: int) -> list[float]:
    if count == 1:
        return [start]
    ratio = (stop / start) ** (1.0 / (count - 1))
    return [start * ratio**i for i in range(count)]


def simulated_annealing(
    model: QuboModel,
    sweeps: int = DEFAULT_SWEEPS,
    betas: list[float] | None = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> tuple[Sample, list[Sample]]:
    """Single-bit-flip Metropolis annealing under a geometric beta schedule.

    Runs ``trials`` independent restarts with per-trial derived seeds and
    returns (best sample across trials, per-trial best samples).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if betas is None:
        betas = geometric_betas(*DEFAULT_BETA_RANGE, sweeps)
    elif len(betas) != sweeps:
        betas = geometric_betas(betas[0], betas[-1], sweeps)

    n = model.n
    neighbors: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    linear = [0.0] * n
    for (i, j), q in model.coeffs.items():
        if i == j:
            linear[i] += q
        else:
            neighbors[i].append((j, q))
            neighbors[j].append((i, q))

    trial_best: list[Sample] = []
    for trial in range(trials):
        rng = random.Random((seed * 0x9E3779B1 + trial) & 0x7FFFFFFF)
        bits = [rng.randint(0, 1) for _ in range(n)]
        energy = model.energy(bits)
        best_bits = list(bits)
        best_energy = energy
        for beta in betas:
            for i in range(n):
                delta = linear[i] + sum(q * bits[j] for j, q in neighbors[i])
                delta = delta if not bits[i] else -delta
                if delta <= 0 or rng.random() < math.exp(-beta * delta):
                    bits[i] ^= 1
                    energy += delta
                    if energy < best_energy:
                        best_energy = energy
                        best_bits = list(bits)
        trial_best.append(Sample(bits=tuple(best_bits), energy=model.energy(best_bits), count=1))

    best = min(trial_best, key=lambda s: (s.energy, s.bits))
    return best, trial_best


def model_from_text_parts(n: int, coeffs: dict[tuple[int, int], float], offset: float) -> QuboModel:
    return QuboModel(n=n, coeffs=dict(coeffs), offset=offset)
