"""Exact time evolution under piecewise-constant Hamiltonians.

Evolution uses a one-time Hermitian eigendecomposition per distinct
Hamiltonian, cached by content hash, so schedules that reuse the same two
Hamiltonians thousands of times pay for two factorizations.  Pulses are
instantaneous unitaries (Rabi limit).  A small-N full product-space evolver
is provided as an independent oracle for the symmetric-sector reduction.
"""

import hashlib
import math
import threading
from dataclasses import dataclass

import numpy as np

from .algebra import DickeSpace, SpinOperator, build_space
from .canonical import CouplingMatrix, LMGModel, realize_hamiltonian
from .errors import NotHermitian, TooLarge
from .states import BlochAngles, SpinState, check_same_space, rotate_state, rotation

HERMITICITY_TOL = 1e-10
FULL_SPACE_MAX_SPINS = 12

_EIG_CACHE: dict[str, tuple[np.ndarray, np.ndarray]] = {}
_EIG_CACHE_LOCK = threading.Lock()
_EIG_CACHE_MAX = 64


def _as_matrix(hamiltonian) -> np.ndarray:
    if isinstance(hamiltonian, SpinOperator):
        return hamiltonian.matrix
    return np.asarray(hamiltonian)


def hamiltonian_eig(hamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a Hermitian matrix, cached by content."""
    mat = _as_matrix(hamiltonian)
    scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 1.0)
    if np.max(np.abs(mat - mat.conj().T)) > HERMITICITY_TOL * scale:
        raise NotHermitian("hamiltonian is not Hermitian")
    digest = hashlib.sha1(mat.tobytes()).hexdigest()
    with _EIG_CACHE_LOCK:
        cached = _EIG_CACHE.get(digest)
    if cached is not None:
        return cached
    w, v = np.linalg.eigh(mat)
    with _EIG_CACHE_LOCK:
        if len(_EIG_CACHE) >= _EIG_CACHE_MAX:
            _EIG_CACHE.pop(next(iter(_EIG_CACHE)))
        _EIG_CACHE[digest] = (w, v)
    return w, v


def evolve(state: SpinState, hamiltonian, t: float) -> SpinState:
    """Propagate |psi> to exp(-i H t) |psi| via the cached eigendecomposition.

    Negative times are permitted (time reversal); the norm is preserved to
    machine precision.
    """
    w, v = hamiltonian_eig(hamiltonian)
    amps = v @ (np.exp(-1j * w * t) * (v.conj().T @ state.amplitudes))
    return SpinState(amplitudes=amps, space=state.space)


def evolve_batch(state: SpinState, hamiltonian, times: np.ndarray) -> np.ndarray:
    """States at many times as columns of a (dim, len(times)) array."""
    w, v = hamiltonian_eig(hamiltonian)
    coeffs = v.conj().T @ state.amplitudes
    phases = np.exp(-1j * np.outer(w, np.asarray(times, dtype=float)))
    return v @ (phases * coeffs[:, None])


@dataclass(frozen=True)
class FreeSegment:
    """Free evolution for ``duration``; ``hamiltonian`` None means the model's."""

    duration: float
    hamiltonian: object = None

    def __post_init__(self):
        if self.duration < 0.0:
            raise ValueError(f"segment duration must be >= 0, got {self.duration}")


@dataclass(frozen=True)
class PulseSegment:
    """Instantaneous rotation exp(-i angle S_axis)."""

    axis: str
    angle: float


@dataclass(frozen=True)
class PulseSchedule:
    """One cycle of segments, applied ``cycle_count`` times.

    Segments are listed in application order.  The total duration is
    cycle_count * (t1 + t2).
    """

    segments: tuple
    cycle_count: int
    t1: float
    t2: float

    @property
    def cycle_time(self) -> float:
        return self.t1 + self.t2

    @property
    def total_time(self) -> float:
        return self.cycle_count * self.cycle_time


def run_schedule(
    state: SpinState,
    schedule: PulseSchedule,
    model: LMGModel,
    sample_every: int = 1,
):
    """Apply the schedule, sampling the squeezing trace at cycle boundaries.

    Returns a SqueezingTrace with snapshots every ``sample_every`` cycles
    (the initial and final states are always included).
    """
    if sample_every < 1:
        raise ValueError(f"sample_every must be >= 1, got {sample_every}")
    space = state.space
    model_h = realize_hamiltonian(model, space)
    check_same_space(state, space)

    free_eigs = {}
    for seg in schedule.segments:
        if isinstance(seg, FreeSegment):
            mat = model_h.matrix if seg.hamiltonian is None else _as_matrix(seg.hamiltonian)
            free_eigs[id(seg)] = hamiltonian_eig(mat)

    times = [0.0]
    snapshots = [state.amplitudes]
    current = state
    elapsed = 0.0
    for cycle in range(1, schedule.cycle_count + 1):
        for seg in schedule.segments:
            if isinstance(seg, FreeSegment):
                w, v = free_eigs[id(seg)]
                amps = v @ (
                    np.exp(-1j * w * seg.duration) * (v.conj().T @ current.amplitudes)
                )
                current = SpinState(amplitudes=amps, space=space)
                elapsed += seg.duration
            else:
                current = rotate_state(current, seg.axis, seg.angle)
        if cycle % sample_every == 0 or cycle == schedule.cycle_count:
            times.append(elapsed)
            snapshots.append(current.amplitudes)

    from .metrics import trace_from_states

    return trace_from_states(space, np.array(times), np.column_stack(snapshots))


def schedule_unitary(schedule: PulseSchedule, model: LMGModel, space: DickeSpace) -> np.ndarray:
    """Dense unitary for a single cycle of the schedule."""
    model_h = realize_hamiltonian(model, space)
    un = np.eye(space.dim, dtype=complex)
    for seg in schedule.segments:
        if isinstance(seg, FreeSegment):
            mat = model_h.matrix if seg.hamiltonian is None else _as_matrix(seg.hamiltonian)
            w, v = hamiltonian_eig(mat)
            step = (v * np.exp(-1j * w * seg.duration)) @ v.conj().T
        else:
            step = rotation(space, seg.axis, seg.angle).matrix
        un = step @ un
    return un


# ---------------------------------------------------------------------------
# full product-space oracle
# ---------------------------------------------------------------------------

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def _pair_term(n_spins: int, site_a: int, op_a: np.ndarray, site_b: int, op_b: np.ndarray):
    """Dense sigma_a^(site_a) sigma_b^(site_b) on the 2^N product space."""
    mat = np.array([[1.0 + 0.0j]])
    for site in range(n_spins):
        if site == site_a:
            mat = np.kron(mat, op_a)
        elif site == site_b:
            mat = np.kron(mat, op_b)
        else:
            mat = np.kron(mat, np.eye(2, dtype=complex))
    return mat


def full_pairwise_hamiltonian(n_spins: int, coupling: CouplingMatrix) -> np.ndarray:
    """H = sum_{j<k} chi_ab sigma_a^j sigma_b^k, built term by term."""
    if n_spins > FULL_SPACE_MAX_SPINS:
        raise TooLarge(
            f"full product space capped at N={FULL_SPACE_MAX_SPINS}, got {n_spins}"
        )
    dim = 2**n_spins
    ham = np.zeros((dim, dim), dtype=complex)
    axes = ("x", "y", "z")
    for j in range(n_spins):
        for k in range(j + 1, n_spins):
            for a, alpha in enumerate(axes):
                for b, beta in enumerate(axes):
                    strength = coupling.chi[a, b]
                    if strength != 0.0:
                        ham += strength * _pair_term(
                            n_spins, j, _PAULI[alpha], k, _PAULI[beta]
                        )
    return ham


def _product_coherent_state(n_spins: int, angles: BlochAngles) -> np.ndarray:
    """Product state with every spin pointing along the Bloch direction."""
    spinor = np.array(
        [
            math.cos(angles.theta / 2.0),
            np.exp(1j * angles.phi) * math.sin(angles.theta / 2.0),
        ],
        dtype=complex,
    )
    psi = np.array([1.0 + 0.0j])
    for _ in range(n_spins):
        psi = np.kron(psi, spinor)
    return psi


def project_symmetric(n_spins: int, psi_full: np.ndarray) -> np.ndarray:
    """Amplitudes of the Dicke components <j, m | psi>, index i = j - m.

    With single-spin basis (up, down), a product index with i bits set holds
    i down spins, so it belongs to the Dicke state of index i.
    """
    dim = 2**n_spins
    down_counts = np.array([bin(b).count("1") for b in range(dim)])
    weights = np.zeros(n_spins + 1, dtype=complex)
    np.add.at(weights.real, down_counts, psi_full.real)
    np.add.at(weights.imag, down_counts, psi_full.imag)
    norms = np.sqrt(np.array([math.comb(n_spins, i) for i in range(n_spins + 1)]))
    return weights / norms


def evolve_full_product_space(
    n_spins: int, coupling: CouplingMatrix, initial: BlochAngles, t: float
) -> SpinState:
    """Evolve the product coherent state under the raw pairwise Hamiltonian
    and project onto the symmetric sector.

    The symmetric sector is invariant, so the projection loses no norm; the
    result is returned as Dicke-basis amplitudes (unnormalized projection,
    which tests can check has unit norm).
    """
    ham = full_pairwise_hamiltonian(n_spins, coupling)
    psi = _product_coherent_state(n_spins, initial)
    w, v = np.linalg.eigh(ham)
    psi_t = v @ (np.exp(-1j * w * t) * (v.conj().T @ psi))
    return SpinState(
        amplitudes=project_symmetric(n_spins, psi_t), space=build_space(n_spins)
    )
