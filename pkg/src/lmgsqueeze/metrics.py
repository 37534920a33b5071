"""Squeezing parameter xi^2 = 4 (Delta S_perp)^2_min / N and its time minimum.

The minimal variance over directions perpendicular to the mean spin is the
smallest eigenvalue of the 2x2 symmetrized covariance in that plane, so no
angular search is needed; the brute-force angular scan survives only in the
tests as an independent oracle.
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .algebra import DickeSpace, build_space, collective_operator
from .canonical import LMGModel, realize_hamiltonian
from .errors import MeanSpinVanished, NoMinimumFound
from .propagate import evolve, evolve_batch
from .states import BlochAngles, SpinState, coherent_state

CONTRAST_EPS = 1e-6
REFINE_XTOL = 1e-6


@dataclass(frozen=True)
class SqueezingSample:
    """Squeezing diagnostics of one state at one time."""

    t: float
    xi2: float
    mean_spin: np.ndarray
    contrast: float
    min_variance_axis: np.ndarray


@dataclass(frozen=True)
class TraceMinimum:
    t: float
    xi2: float
    bracketed: bool = True


@dataclass(frozen=True)
class SqueezingTrace:
    """Time-ordered squeezing samples plus the located first local minimum."""

    samples: tuple
    minimum: TraceMinimum

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def xi2_values(self) -> np.ndarray:
        return np.array([s.xi2 for s in self.samples])


def _batch_moments(space: DickeSpace, states: np.ndarray):
    """First moments (3, K) and symmetrized second moments (3, 3, K)."""
    ops = [collective_operator(space, lbl).matrix for lbl in ("Sx", "Sy", "Sz")]
    applied = [op @ states for op in ops]
    conj = states.conj()
    mean = np.empty((3, states.shape[1]))
    for a in range(3):
        mean[a] = np.sum(conj * applied[a], axis=0).real
    second = np.empty((3, 3, states.shape[1]))
    for a in range(3):
        for b in range(a, 3):
            # <Sa Sb> = (Sa psi)^dag (Sb psi); the real part symmetrizes
            second[a, b] = np.sum(applied[a].conj() * applied[b], axis=0).real
            second[b, a] = second[a, b]
    return mean, second


def _perpendicular_frame(directions: np.ndarray):
    """Orthonormal pair (n1, n2) perpendicular to each unit column vector."""
    k = directions.shape[1]
    ref = np.zeros((3, k))
    ref[np.argmin(np.abs(directions), axis=0), np.arange(k)] = 1.0
    n1 = np.cross(ref.T, directions.T).T
    n1 /= np.linalg.norm(n1, axis=0)
    n2 = np.cross(directions.T, n1.T).T
    return n1, n2


def batch_squeezing(space: DickeSpace, states: np.ndarray):
    """Vectorized xi^2, contrast, mean spin, and minimal-variance axis.

    Columns whose contrast falls below CONTRAST_EPS get xi2 = nan (the mean
    spin direction, hence the perpendicular plane, is undefined there).
    """
    n = space.n_spins
    mean, second = _batch_moments(space, states)
    length = np.linalg.norm(mean, axis=0)
    contrast = length / (n / 2.0)
    valid = contrast >= CONTRAST_EPS

    k = states.shape[1]
    xi2 = np.full(k, np.nan)
    axes = np.full((3, k), np.nan)
    if np.any(valid):
        dirs = mean[:, valid] / length[valid]
        n1, n2 = _perpendicular_frame(dirs)
        sec = second[:, :, valid]
        mn = mean[:, valid]

        def cov(u, v):
            quad = np.einsum("ik,ijk,jk->k", u, sec, v)
            return quad - np.sum(u * mn, axis=0) * np.sum(v * mn, axis=0)

        c11 = cov(n1, n1)
        c22 = cov(n2, n2)
        c12 = cov(n1, n2)
        half_tr = 0.5 * (c11 + c22)
        radius = np.sqrt((0.5 * (c11 - c22)) ** 2 + c12**2)
        lam = half_tr - radius
        xi2[valid] = 4.0 * lam / n

        # eigenvector of [[c11, c12], [c12, c22]] for the smaller eigenvalue;
        # fall back to n1 when the plane is degenerate (isotropic variance)
        vx = np.where(radius > 1e-12 * np.maximum(half_tr, 1.0), c12, 0.0)
        vy = np.where(radius > 1e-12 * np.maximum(half_tr, 1.0), lam - c11, 0.0)
        vnorm = np.hypot(vx, vy)
        degenerate = vnorm < 1e-30
        vx = np.where(degenerate, 1.0, vx)
        vy = np.where(degenerate, 0.0, vy)
        vnorm = np.where(degenerate, 1.0, vnorm)
        axes[:, valid] = n1 * (vx / vnorm) + n2 * (vy / vnorm)
    return xi2, contrast, mean, axes


def squeezing_parameter(state: SpinState, t: float = 0.0) -> SqueezingSample:
    """Squeezing diagnostics of a single state.

    Raises MeanSpinVanished when the contrast is below CONTRAST_EPS (the
    over-squeezed regime, where no perpendicular plane is defined).
    """
    xi2, contrast, mean, axes = batch_squeezing(
        state.space, state.amplitudes[:, None]
    )
    if not np.isfinite(xi2[0]):
        raise MeanSpinVanished(
            f"mean spin contrast {contrast[0]:.3e} below {CONTRAST_EPS:.0e}"
        )
    return SqueezingSample(
        t=t,
        xi2=float(xi2[0]),
        mean_spin=mean[:, 0],
        contrast=float(contrast[0]),
        min_variance_axis=axes[:, 0],
    )


def first_local_minimum(values: np.ndarray):
    """Index of the first interior local minimum, or None.

    A plateau counts as a minimum at its left edge (<= on the left, strict <
    on the right).
    """
    v = np.asarray(values)
    for k in range(1, len(v) - 1):
        if not (np.isfinite(v[k - 1]) and np.isfinite(v[k]) and np.isfinite(v[k + 1])):
            continue
        if v[k] <= v[k - 1] and v[k] < v[k + 1]:
            return k
    return None


def trace_from_states(
    space: DickeSpace, times: np.ndarray, states: np.ndarray
) -> SqueezingTrace:
    """Build a SqueezingTrace from precomputed state columns."""
    xi2, contrast, mean, axes = batch_squeezing(space, states)
    samples = tuple(
        SqueezingSample(
            t=float(times[i]),
            xi2=float(xi2[i]),
            mean_spin=mean[:, i],
            contrast=float(contrast[i]),
            min_variance_axis=axes[:, i],
        )
        for i in range(len(times))
    )
    k = first_local_minimum(xi2)
    if k is None:
        finite = np.where(np.isfinite(xi2))[0]
        best = finite[np.argmin(xi2[finite])] if len(finite) else 0
        minimum = TraceMinimum(t=float(times[best]), xi2=float(xi2[best]), bracketed=False)
    else:
        minimum = TraceMinimum(t=float(times[k]), xi2=float(xi2[k]), bracketed=True)
    return SqueezingTrace(samples=samples, minimum=minimum)


def minimize_hamiltonian(
    space: DickeSpace,
    hamiltonian,
    initial: SpinState,
    t_max: float,
    grid_points: int = 2000,
    refine: bool = True,
    allow_unbracketed: bool = False,
) -> SqueezingTrace:
    """Scan xi^2(t) on a uniform grid and refine the first local minimum.

    Refinement re-evaluates the exact evolution (golden-section search to a
    relative time tolerance of 1e-6); nothing is interpolated.
    """
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    times = np.linspace(0.0, t_max, grid_points)
    states = evolve_batch(initial, hamiltonian, times)
    trace = trace_from_states(space, times, states)
    if not trace.minimum.bracketed:
        if allow_unbracketed:
            return trace
        raise NoMinimumFound(
            "xi^2 has no bracketed local minimum on the grid; "
            "increase the horizon if the trace is still decreasing"
        )
    if not refine:
        return trace

    k = int(np.searchsorted(times, trace.minimum.t))

    def objective(t: float) -> float:
        state_t = evolve(initial, hamiltonian, t)
        xi2, _, _, _ = batch_squeezing(space, state_t.amplitudes[:, None])
        return float(xi2[0]) if np.isfinite(xi2[0]) else np.inf

    try:
        result = optimize.minimize_scalar(
            objective,
            bracket=(times[k - 1], times[k], times[k + 1]),
            method="golden",
            options={"xtol": REFINE_XTOL},
        )
        minimum = TraceMinimum(t=float(result.x), xi2=float(result.fun), bracketed=True)
    except ValueError:
        minimum = trace.minimum  # flat bracket; keep the grid point
    return SqueezingTrace(samples=trace.samples, minimum=minimum)


def minimize_over_time(
    model: LMGModel,
    initial: BlochAngles,
    horizon: float = 5.0,
    grid_points: int = 2000,
    refine: bool = True,
) -> SqueezingTrace:
    """Locate the first squeezing minimum of the model from a coherent state.

    ``horizon`` is dimensionless: the scan covers t in [0, horizon/(chi N)].
    Raises NoMinimumFound if xi^2 never turns upward within the horizon.
    """
    if grid_points < 100:
        raise ValueError(f"grid_points must be >= 100, got {grid_points}")
    space = build_space(model.n_spins)
    hamiltonian = realize_hamiltonian(model, space)
    psi0 = coherent_state(space, initial)
    t_max = horizon / (model.chi * model.n_spins)
    return minimize_hamiltonian(
        space, hamiltonian, psi0, t_max, grid_points=grid_points, refine=refine
    )


def fit_loglog_slope(n_values, xi2_values) -> float:
    """Least-squares slope of log(xi2_min) against log(N)."""
    return float(
        np.polyfit(np.log(np.asarray(n_values, float)), np.log(np.asarray(xi2_values)), 1)[0]
    )
