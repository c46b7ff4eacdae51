"""
Unitary time evolution of two- and four-component states.

States are 1-D complex arrays (length 4 for the Dirac-like models, 2 for
the baseline). The steppers take a callable ``hamiltonian_at(t)``;
:func:`evolve` uses the same schemes but evaluates the Hamiltonian for a
whole block of steps at once, which is where nearly all the speed comes
from. Both routes produce the same numbers.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from diracatom.algebra import dagger
from diracatom.model import (
    CouplingKind,
    FieldModel,
    ModelKind,
    PhysicalParams,
    ZeroField,
    hamiltonian_callable,
    hamiltonian_full,
    rest_frame_phases,
)

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
EIGEN_RESIDUAL_TOL = 1e-10
DEGENERATE_TOL = 1e-12
# steps per vectorized Hamiltonian evaluation in evolve()
CHUNK = 4096


class IntegratorKind(str, Enum):
    EXP_MIDPOINT = "ExpMidpoint"
    RK4 = "RK4"
    MAGNUS2 = "Magnus2"


class Direction(str, Enum):
    REMOVE_REST = "remove_rest"
    RESTORE_REST = "restore_rest"


class NumericalAbort(RuntimeError):
    """Raised when a state or Hamiltonian stops being finite."""


def _check_hermitian(H: np.ndarray) -> None:
    if not np.all(np.isfinite(H)):
        raise NumericalAbort("Hamiltonian contains non-finite entries")
    dev = np.max(np.abs(H - dagger(H)))
    if dev > HERMITIAN_TOL:
        raise ValueError(f"Hamiltonian is not Hermitian (max deviation {dev:.3e})")


def hermitian_eigh(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a (stack of) Hermitian matrices with a residual check.

    Enforces ``‖Hv - λv‖ <= 1e-10 ‖H‖`` (Frobenius norms, per matrix).
    """
    w, v = np.linalg.eigh(H)
    residual = np.linalg.norm(H @ v - v * w[..., None, :], axis=(-2, -1))
    scale = np.linalg.norm(H, axis=(-2, -1))
    if np.any(residual > EIGEN_RESIDUAL_TOL * scale + 1e-300):
        raise NumericalAbort("Hermitian eigendecomposition failed its residual check")
    return w, v


def hermitian_propagator(H: np.ndarray, dt, hbar: float = 1.0) -> np.ndarray:
    """exp(-i H dt / ħ) for Hermitian ``H`` (broadcasts over leading axes)."""
    _check_hermitian(H)
    w, v = hermitian_eigh(H)
    dt = np.asarray(dt, dtype=float)
    phases = np.exp(-1j * w * dt[..., None] / hbar)
    return (v * phases[..., None, :]) @ dagger(v)


def _magnus2_propagator(H: np.ndarray, dt, hbar: float = 1.0) -> np.ndarray:
    _check_hermitian(H)
    dt = np.asarray(dt, dtype=float)
    return scipy.linalg.expm((-1j / hbar) * dt[..., None, None] * H)


def step_exp_midpoint(hamiltonian_at: Callable, state, t: float, dt: float, hbar: float = 1.0):
    """One step of exp(-i H(t + dt/2) dt / ħ) via Hermitian eigendecomposition."""
    H = np.asarray(hamiltonian_at(t + dt / 2))
    return hermitian_propagator(H, dt, hbar) @ np.asarray(state, dtype=complex)


def step_magnus2(hamiltonian_at: Callable, state, t: float, dt: float, hbar: float = 1.0):
    """Second-order Magnus step.

    At second order the Magnus generator is -(i/ħ) dt H(t + dt/2), so this
    agrees with :func:`step_exp_midpoint`; the exponential is taken with a
    Padé matrix exponential instead of an eigendecomposition.
    """
    H = np.asarray(hamiltonian_at(t + dt / 2))
    return _magnus2_propagator(H, dt, hbar) @ np.asarray(state, dtype=complex)


def _rk4_update(H0, H1, H2, psi, dt, hbar):
    c = -1j / hbar
    k1 = c * (H0 @ psi)
    k2 = c * (H1 @ (psi + 0.5 * dt * k1))
    k3 = c * (H1 @ (psi + 0.5 * dt * k2))
    k4 = c * (H2 @ (psi + dt * k3))
    return psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def step_rk4(hamiltonian_at: Callable, state, t: float, dt: float, hbar: float = 1.0):
    """Classical fourth-order Runge-Kutta step of iħ ψ' = H(t) ψ (not unitary)."""
    H = np.stack([np.asarray(hamiltonian_at(s)) for s in (t, t + dt / 2, t + dt)])
    _check_hermitian(H)
    return _rk4_update(H[0], H[1], H[2], np.asarray(state, dtype=complex), dt, hbar)


# -- problems and trajectories ----------------------------------------------


@dataclass(frozen=True)
class EvolutionProblem:
    model_kind: ModelKind
    params: PhysicalParams
    initial_state: np.ndarray
    t0: float
    t1: float
    dt: float
    coupling: CouplingKind = CouplingKind.ALPHA_E
    field: FieldModel = ZeroField()
    integrator: IntegratorKind = IntegratorKind.EXP_MIDPOINT
    sample_stride: int = 1
    polarization_axis: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "model_kind", ModelKind(self.model_kind))
        object.__setattr__(self, "coupling", CouplingKind(self.coupling))
        object.__setattr__(self, "integrator", IntegratorKind(self.integrator))
        psi = np.array(self.initial_state, dtype=complex)
        psi.setflags(write=False)
        object.__setattr__(self, "initial_state", psi)
        if psi.shape != (self.model_kind.dimension,):
            raise ValueError(
                f"component count mismatch: {self.model_kind.value} needs "
                f"{self.model_kind.dimension} components, got {psi.size}"
            )
        if not np.all(np.isfinite(psi)):
            raise ValueError("initial_state must be finite")
        if not self.t1 > self.t0:
            raise ValueError(f"t1 must exceed t0 (t0={self.t0}, t1={self.t1})")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.dt > self.t1 - self.t0:
            raise ValueError(f"dt={self.dt} exceeds the span t1 - t0 = {self.t1 - self.t0}")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ValueError(f"sample_stride must be a positive integer, got {self.sample_stride}")

    @property
    def n_steps(self) -> int:
        # a trailing sliver below 1e-9 dt is folded into the previous step
        return max(1, math.ceil((self.t1 - self.t0) / self.dt - 1e-9))

    def hamiltonian_at(self) -> Callable:
        return hamiltonian_callable(
            self.model_kind, self.params, self.coupling, self.field, self.polarization_axis
        )

    def replace(self, **changes) -> "EvolutionProblem":
        return replace(self, **changes)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    problem: EvolutionProblem

    def __len__(self) -> int:
        return len(self.times)

    @property
    def dimension(self) -> int:
        return self.states.shape[1]


def _step_grid(problem: EvolutionProblem) -> tuple[np.ndarray, np.ndarray]:
    """Left endpoints and widths of every step; the last one lands on t1."""
    n = problem.n_steps
    left = problem.t0 + problem.dt * np.arange(n)
    widths = np.full(n, float(problem.dt))
    widths[-1] = problem.t1 - left[-1]
    return left, widths


def evolve(problem: EvolutionProblem) -> Trajectory:
    """Fixed-step march from t0 to t1, sampling every ``sample_stride`` steps.

    The final step is shortened so the last sample sits exactly on t1.
    Raises :class:`NumericalAbort` as soon as the state becomes non-finite.
    """
    hamiltonian_at = problem.hamiltonian_at()
    hbar = problem.params.hbar
    stride = int(problem.sample_stride)
    left, widths = _step_grid(problem)
    n = len(left)

    psi = problem.initial_state.copy()
    times = [problem.t0]
    states = [psi.copy()]
    for start in range(0, n, CHUNK):
        stop = min(n, start + CHUNK)
        t_l, h = left[start:stop], widths[start:stop]
        if problem.integrator is IntegratorKind.RK4:
            H0 = np.asarray(hamiltonian_at(t_l))
            H1 = np.asarray(hamiltonian_at(t_l + h / 2))
            H2 = np.asarray(hamiltonian_at(t_l + h))
            for H in (H0, H1, H2):
                _check_hermitian(H)
            for j in range(stop - start):
                psi = _rk4_update(H0[j], H1[j], H2[j], psi, h[j], hbar)
                k = start + j + 1
                if k % stride == 0 or k == n:
                    times.append(problem.t1 if k == n else left[k])
                    states.append(psi)
        else:
            H = np.asarray(hamiltonian_at(t_l + h / 2))
            if problem.integrator is IntegratorKind.MAGNUS2:
                U = _magnus2_propagator(H, h, hbar)
            else:
                U = hermitian_propagator(H, h, hbar)
            for j in range(stop - start):
                psi = U[j] @ psi
                k = start + j + 1
                if k % stride == 0 or k == n:
                    times.append(problem.t1 if k == n else left[k])
                    states.append(psi)
        if not np.all(np.isfinite(psi)):
            raise NumericalAbort(
                f"state became non-finite between t={left[start]:.6g} and "
                f"t={left[stop - 1] + widths[stop - 1]:.6g}"
            )
    log.debug("evolved %d steps, %d samples", n, len(times))
    return Trajectory(np.array(times), np.array(states), problem)


# -- frame changes -----------------------------------------------------------


def canonical_transform(state, t, params: PhysicalParams, direction) -> np.ndarray:
    """Apply exp(±iβ mc² t/ħ) to a four-component state.

    ``remove_rest`` multiplies components 1, 2 by exp(+i mc² t/ħ) and
    components 3, 4 by exp(-i mc² t/ħ); ``restore_rest`` undoes it.
    """
    u = rest_frame_phases(params, t)
    if Direction(direction) is Direction.RESTORE_REST:
        u = u.conj()
    return u * np.asarray(state, dtype=complex)


def transform_trajectory(traj: Trajectory, params: PhysicalParams, direction) -> Trajectory:
    if traj.dimension != 4:
        raise ValueError("canonical transform needs a four-component trajectory")
    states = canonical_transform(traj.states, traj.times, params, direction)
    return Trajectory(traj.times.copy(), states, traj.problem)


# -- free plane-wave modes ---------------------------------------------------


@dataclass(frozen=True)
class PlaneWaveMode:
    energy: float
    vector: np.ndarray
    kind: str  # "particle" or "antiparticle"


def plane_wave_modes(params: PhysicalParams, coupling=CouplingKind.NONE, field=None):
    """Classify the eigenmodes of the free Hamiltonian by the sign of the energy.

    The spatial factor exp(ip·r/ħ) is implicit. Each eigenvector is
    normalized and rephased so its largest component is real and positive.
    Modes come back in ascending energy.
    """
    if field is None:
        field = ZeroField()
    if not isinstance(field, ZeroField):
        raise ValueError("plane-wave classification requires a zero field")
    H = hamiltonian_full(params, coupling, field, 0.0)
    w, v = hermitian_eigh(H)
    if np.any(np.abs(w) <= DEGENERATE_TOL):
        raise ValueError("degenerate rest frame: zero eigenvalue cannot be classified")
    modes = []
    for energy, vec in zip(w, v.T):
        lead = vec[np.argmax(np.abs(vec))]
        vec = vec * (abs(lead) / lead) / np.linalg.norm(vec)
        kind = "particle" if energy > 0 else "antiparticle"
        modes.append(PlaneWaveMode(float(energy), vec, kind))
    return modes


def rabi_analytic(rabi_freq, detuning, t):
    """Upper-level probability Ω²/(Ω²+Δ²) sin²(√(Ω²+Δ²) t/2), starting in the lower level."""
    rabi_freq = np.asarray(rabi_freq, dtype=float)
    detuning = np.asarray(detuning, dtype=float)
    generalized2 = rabi_freq**2 + detuning**2
    with np.errstate(invalid="ignore", divide="ignore"):
        amplitude = np.where(generalized2 > 0, rabi_freq**2 / generalized2, 0.0)
    p = amplitude * np.sin(np.sqrt(generalized2) * np.asarray(t, dtype=float) / 2) ** 2
    return float(p) if np.ndim(p) == 0 else p
