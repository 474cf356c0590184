"""Dense statevector simulator and QAOA solver for Ising models.

States are numpy complex vectors of length 2^n; basis index z encodes bits
MSB-first (qubit 0 is the most significant bit), matching the bit order used
by the QUBO module. Spin +1 corresponds to bit 1.

The simulator is capped at ``DEFAULT_QUBIT_CAP`` qubits (~64 MiB of
amplitudes); the cap doubles as the capability advertised by the
statevector backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .qubo import IsingModel, QuboModel, Sample, index_to_bits, qubo_to_ising

DEFAULT_QUBIT_CAP = 22


class TooManyQubits(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


@dataclass
class QaoaParams:
    p: int
    gammas: list[float]
    betas: list[float]

    def __post_init__(self):
        if self.p < 1 or len(self.gammas) != self.p or len(self.betas) != self.p:
            raise ValueError("need exactly p gammas and p betas with p >= 1")


@dataclass
class QaoaResult:
    best: Sample
    expectation_history: list[float]
    params: QaoaParams
    shots: int
    samples: list[Sample] = field(default_factory=list)


def uniform_state(n_qubits: int, cap: int = DEFAULT_QUBIT_CAP) -> StateVector:
    """The |+>^n state that QAOA starts from."""
    if not 1 <= n_qubits <= cap:
        raise TooManyQubits(f"need 1 <= qubits <= {cap}, got {n_qubits}")
    amp = np.full(2**n_qubits, 2.0 ** (-n_qubits / 2.0), dtype=np.complex128)
    return StateVector(n_qubits=n_qubits, amplitudes=amp)


def ising_diagonal(ising: IsingModel) -> np.ndarray:
    """Ising energies of all basis states, without the offset."""
    n = ising.n
    states = np.arange(2**n, dtype=np.int64)
    spins = {}
    for i in range(n):
        spins[i] = (((states >> (n - 1 - i)) & 1) * 2 - 1).astype(np.float64)
    diag = np.zeros(2**n, dtype=np.float64)
    for i, hi in enumerate(ising.h):
        if hi:
            diag += hi * spins[i]
    for (i, j), jij in ising.J.items():
        if jij:
            diag += jij * spins[i] * spins[j]
    return diag


def apply_cost_layer(state: StateVector, ising: IsingModel, gamma: float) -> StateVector:
    """Phase each basis state by exp(-i * gamma * E(z)); diagonal, norm-preserving."""
    if ising.n != state.n_qubits:
        raise DimensionMismatch(f"state has {state.n_qubits} qubits, model has {ising.n}")
    diag = ising_diagonal(ising)
    state.amplitudes *= np.exp(-1j * gamma * diag)
    return state


def _apply_cost_diag(state: StateVector, diag: np.ndarray, gamma: float) -> StateVector:
    state.amplitudes *= np.exp(-1j * gamma * diag)
    return state


def apply_mixer_layer(state: StateVector, beta: float) -> StateVector:
    """Rotate every qubit by angle 2*beta about X."""
    c = np.cos(beta)
    s = -1j * np.sin(beta)
    n = state.n_qubits
    amp = state.amplitudes
    for q in range(n):
        shaped = amp.reshape(2**q, 2, 2 ** (n - q - 1))
        a0 = shaped[:, 0, :].copy()
        a1 = shaped[:, 1, :]
        shaped[:, 0, :] = c * a0 + s * a1
        shaped[:, 1, :] = s * a0 + c * a1
    return state


def _evolve(diag: np.ndarray, n: int, params: QaoaParams, cap: int) -> StateVector:
    state = uniform_state(n, cap=cap)
    for gamma, beta in zip(params.gammas, params.betas):
        _apply_cost_diag(state, diag, gamma)
        apply_mixer_layer(state, beta)
    return state


def qaoa_expectation(ising: IsingModel, params: QaoaParams, cap: int = DEFAULT_QUBIT_CAP) -> float:
    """<psi(gamma, beta) | H_C | psi(gamma, beta)>, offset included."""
    diag = ising_diagonal(ising)
    state = _evolve(diag, ising.n, params, cap)
    probs = np.abs(state.amplitudes) ** 2
    return float(np.sum(probs * (diag + ising.offset)))


def optimize_qaoa(
    ising: IsingModel,
    p: int = 1,
    restarts: int = 3,
    max_evaluations: int = 400,
    seed: int = 0,
    cap: int = DEFAULT_QUBIT_CAP,
) -> tuple[QaoaParams, list[float]]:
    """Nelder-Mead descent on the QAOA expectation from random starts.

    The all-zero parameter vector is always among the candidate starts, so the
    optimized expectation can never exceed the zero-parameter expectation.
    Returns the best parameters and the best-so-far expectation history.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if ising.n > cap:
        raise TooManyQubits(f"{ising.n} qubits exceed the cap of {cap}")
    diag = ising_diagonal(ising)
    offset = ising.offset
    n = ising.n

    def objective(x: np.ndarray) -> float:
        params = QaoaParams(p=p, gammas=list(x[:p]), betas=list(x[p:]))
        state = _evolve(diag, n, params, cap)
        probs = np.abs(state.amplitudes) ** 2
        return float(np.sum(probs * (diag + offset)))

    rng = np.random.default_rng(seed)
    starts = [np.zeros(2 * p)]
    for _ in range(restarts):
        gammas = rng.uniform(0.0, 2.0 * np.pi, size=p)
        betas = rng.uniform(0.0, np.pi, size=p)
        starts.append(np.concatenate([gammas, betas]))

    best_x = starts[0]
    best_val = objective(starts[0])
    history = [best_val]
    for x0 in starts:
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxfev": max_evaluations, "xatol": 1e-4, "fatol": 1e-7},
        )
        if res.fun < best_val:
            best_val = float(res.fun)
            best_x = res.x
        history.append(best_val)
    params = QaoaParams(p=p, gammas=list(best_x[:p]), betas=list(best_x[p:]))
    return params, history


def sample_state(
    state: StateVector,
    shots: int,
    seed: int = 0,
    energies: np.ndarray | None = None,
) -> list[Sample]:
    """Multinomial measurement of |amp|^2; counts sum to ``shots``.

    ``energies`` optionally assigns each basis state an energy recorded on the
    returned samples (0.0 when omitted).
    """
    if shots < 1:
        raise ValueError("need at least one shot")
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    samples = []
    for z in np.nonzero(counts)[0]:
        e = float(energies[z]) if energies is not None else 0.0
        samples.append(Sample(bits=index_to_bits(int(z), state.n_qubits), energy=e, count=int(counts[z])))
    return samples


DEFAULT_QAOA_DEPTH = 2
DEFAULT_QAOA_SHOTS = 512
DEFAULT_QAOA_RESTARTS = 3


def qaoa_solve(
    qubo: QuboModel,
    p: int = DEFAULT_QAOA_DEPTH,
    shots: int = DEFAULT_QAOA_SHOTS,
    restarts: int = DEFAULT_QAOA_RESTARTS,
    seed: int = 0,
    max_evaluations: int = 400,
    cap: int = DEFAULT_QUBIT_CAP,
) -> QaoaResult:
    """Full QAOA loop over a QUBO: optimize angles, sample, return the best.

    Energies are reported in the QUBO convention. Raises TooManyQubits when
    the variable count exceeds the statevector cap.
    """
    if qubo.n > cap:
        raise TooManyQubits(f"{qubo.n} qubits exceed the cap of {cap}")
    ising = qubo_to_ising(qubo)
    params, history = optimize_qaoa(
        ising, p=p, restarts=restarts, max_evaluations=max_evaluations, seed=seed, cap=cap
    )
    diag = ising_diagonal(ising)
    state = _evolve(diag, ising.n, params, cap)
    samples = sample_state(state, shots=shots, seed=seed + 1, energies=diag + ising.offset)
    best = min(samples, key=lambda s: (s.energy, s.bits))
    best = Sample(bits=best.bits, energy=qubo.energy(best.bits), count=best.count)
    return QaoaResult(
        best=best,
        expectation_history=history,
        params=params,
        shots=shots,
        samples=samples,
    )
