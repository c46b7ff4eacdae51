"""
Physical parameters, classical drive fields and Hamiltonian assembly.

Every Hamiltonian here follows the convention iħ ∂ψ/∂t = H ψ with the
dipole interaction entering as -μ (K·E), K being alpha (polar coupling) or
Sigma (axial coupling). All assembly functions broadcast over an array of
times: a scalar ``t`` gives one matrix, an array of shape ``(n,)`` gives a
stack of shape ``(n, 4, 4)`` (or ``(n, 2, 2)`` for the baseline).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from diracatom.algebra import AXES, Axis, alpha, beta, beta1, pauli, sigma_big

#: Uniform samples used by :func:`validate_weak_field`.
WEAK_FIELD_SAMPLES = 1000


class CouplingKind(str, Enum):
    ALPHA_E = "AlphaE"
    SIGMA_E = "SigmaE"
    NONE = "None"


class ModelKind(str, Enum):
    FULL = "Full"
    TRANSFORMED_LITERAL = "TransformedLiteral"
    TRANSFORMED_EXACT = "TransformedExact"
    BASELINE2 = "Baseline2"

    @property
    def dimension(self) -> int:
        return 2 if self is ModelKind.BASELINE2 else 4


def _vec3(v, name: str) -> tuple[float, float, float]:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be a finite 3-vector, got {v!r}")
    return tuple(float(x) for x in arr)


@dataclass(frozen=True)
class PhysicalParams:
    """Parameters of a single atom.

    ``omega`` is the transition frequency of the four-component models
    (ħω multiplies beta1). ``omega_a`` is the baseline two-level splitting and
    is deliberately independent of ``omega``; callers relating the two must
    do so explicitly. ``gamma`` is the transition halfwidth used only by the
    weak-field validity ratio.
    """

    hbar: float = 1.0
    c: float = 1.0
    mass: float = 0.0
    omega: float = 0.0
    mu: float = 1.0
    momentum: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gamma: Optional[float] = None
    omega_a: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "momentum", _vec3(self.momentum, "momentum"))
        for name in ("hbar", "c", "mass", "omega", "mu"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite real number, got {value!r}")
        if self.hbar <= 0:
            raise ValueError(f"hbar must be > 0, got {self.hbar}")
        if self.c <= 0:
            raise ValueError(f"c must be > 0, got {self.c}")
        if self.mass < 0:
            raise ValueError(f"mass must be >= 0, got {self.mass}")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if self.gamma is not None and not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be > 0 when present, got {self.gamma}")
        if self.omega_a is not None and not (math.isfinite(self.omega_a) and self.omega_a >= 0):
            raise ValueError(f"omega_a must be >= 0 when present, got {self.omega_a}")

    @property
    def rest_energy(self) -> float:
        return self.mass * self.c**2

    @property
    def transition_energy(self) -> float:
        return self.hbar * self.omega


# -- fields -----------------------------------------------------------------


@dataclass(frozen=True)
class ZeroField:
    kind = "zero"

    def at(self, t):
        t = np.asarray(t, dtype=float)
        return np.zeros(t.shape + (3,))


@dataclass(frozen=True)
class StaticField:
    amplitude: tuple[float, float, float]
    kind = "static"

    def __post_init__(self):
        object.__setattr__(self, "amplitude", _vec3(self.amplitude, "amplitude"))

    def at(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.array(self.amplitude), t.shape + (3,)).copy()


@dataclass(frozen=True)
class CosineField:
    amplitude: tuple[float, float, float]
    nu: float
    phase: float = 0.0
    kind = "cosine"

    def __post_init__(self):
        object.__setattr__(self, "amplitude", _vec3(self.amplitude, "amplitude"))
        if not math.isfinite(self.nu) or self.nu < 0:
            raise ValueError(f"nu must be >= 0, got {self.nu}")

    def at(self, t):
        t = np.asarray(t, dtype=float)
        envelope = np.cos(self.nu * t + self.phase)
        return envelope[..., None] * np.array(self.amplitude)


@dataclass(frozen=True)
class GaussianPulse:
    amplitude: tuple[float, float, float]
    nu: float
    phase: float
    center: float
    width: float
    kind = "gaussian"

    def __post_init__(self):
        object.__setattr__(self, "amplitude", _vec3(self.amplitude, "amplitude"))
        if not math.isfinite(self.nu) or self.nu < 0:
            raise ValueError(f"nu must be >= 0, got {self.nu}")
        if not math.isfinite(self.width) or self.width <= 0:
            raise ValueError(f"width must be > 0, got {self.width}")

    def at(self, t):
        t = np.asarray(t, dtype=float)
        envelope = np.exp(-((t - self.center) ** 2) / (2 * self.width**2))
        envelope = envelope * np.cos(self.nu * t + self.phase)
        return envelope[..., None] * np.array(self.amplitude)


FieldModel = Union[ZeroField, StaticField, CosineField, GaussianPulse]


def field_at(model: FieldModel, t):
    """Field vector E(t); shape ``(3,)`` for scalar t, ``t.shape + (3,)`` otherwise."""
    return model.at(t)


# -- Hamiltonians -----------------------------------------------------------

_ALPHA = np.stack([alpha(ax) for ax in AXES])
_SIGMA = np.stack([sigma_big(ax) for ax in AXES])
_BETA = beta()
_BETA1 = beta1()


def _coupling_matrices(coupling) -> Optional[np.ndarray]:
    coupling = CouplingKind(coupling)
    if coupling is CouplingKind.ALPHA_E:
        return _ALPHA
    if coupling is CouplingKind.SIGMA_E:
        return _SIGMA
    return None


def _check_params(params) -> None:
    if not isinstance(params, PhysicalParams):
        raise TypeError(f"expected PhysicalParams, got {type(params).__name__}")


def _without_rest(params: PhysicalParams, coupling, field: FieldModel, t) -> np.ndarray:
    _check_params(params)
    t = np.asarray(t, dtype=float)
    static = params.c * np.einsum("i,ijk->jk", np.array(params.momentum), _ALPHA)
    static = static + params.transition_energy * _BETA1
    H = np.broadcast_to(static, t.shape + (4, 4)).copy()
    K = _coupling_matrices(coupling)
    if K is not None:
        E = field_at(field, t)
        H -= params.mu * np.einsum("...i,ijk->...jk", E, K)
    return H


def hamiltonian_full(params: PhysicalParams, coupling, field: FieldModel, t) -> np.ndarray:
    """H = c(α·p) - μ(K·E(t)) + β mc² + β¹ ħω."""
    return _without_rest(params, coupling, field, t) + params.rest_energy * _BETA


def hamiltonian_transformed(params: PhysicalParams, coupling, field: FieldModel, t) -> np.ndarray:
    """The full Hamiltonian with the β mc² term dropped outright."""
    return _without_rest(params, coupling, field, t)


def rest_frame_phases(params: PhysicalParams, t) -> np.ndarray:
    """Diagonal of exp(+iβ mc² t/ħ); shape ``t.shape + (4,)``."""
    phi = params.rest_energy * np.asarray(t, dtype=float) / params.hbar
    upper = np.exp(1j * phi)
    return np.stack([upper, upper, upper.conj(), upper.conj()], axis=-1)


def hamiltonian_exact_interaction(
    params: PhysicalParams, coupling, field: FieldModel, t
) -> np.ndarray:
    """U (H_full - β mc²) U† with U(t) = exp(+iβ mc² t/ħ).

    Diagonal blocks are untouched; the off-diagonal blocks pick up
    exp(±2i mc² t/ħ).
    """
    H = _without_rest(params, coupling, field, t)
    u = rest_frame_phases(params, t)
    return u[..., :, None] * H * u.conj()[..., None, :]


def hamiltonian_baseline2(
    params: PhysicalParams, field: FieldModel, t, polarization_axis
) -> np.ndarray:
    """Conventional two-level Hamiltonian ħω_a (1+σ_z)/2 - μ E_axis(t) σ_axis.

    The kinetic p²/2m term is a global phase in the momentum representation
    and is omitted.
    """
    _check_params(params)
    if params.omega_a is None:
        raise ValueError("baseline model requires params.omega_a")
    axis = Axis(polarization_axis)
    amplitude = getattr(field, "amplitude", (0.0, 0.0, 0.0))
    stray = [a for i, a in enumerate(amplitude) if i != axis.index and a != 0.0]
    if stray:
        raise ValueError(
            f"field polarization {amplitude} is not aligned with axis {axis.value}"
        )
    t = np.asarray(t, dtype=float)
    upper_projector = np.diag([1.0, 0.0]).astype(complex)
    E = field_at(field, t)[..., axis.index]
    H = params.hbar * params.omega_a * upper_projector
    return H - params.mu * E[..., None, None] * pauli(axis)


def hamiltonian_callable(
    model_kind,
    params: PhysicalParams,
    coupling=CouplingKind.ALPHA_E,
    field: FieldModel = ZeroField(),
    polarization_axis=None,
) -> Callable:
    """Return ``t -> H(t)`` for the chosen model, broadcasting over ``t``."""
    kind = ModelKind(model_kind)
    if kind is ModelKind.BASELINE2:
        axis = polarization_axis if polarization_axis is not None else infer_axis(field)
        return lambda t: hamiltonian_baseline2(params, field, t, axis)
    builder = {
        ModelKind.FULL: hamiltonian_full,
        ModelKind.TRANSFORMED_LITERAL: hamiltonian_transformed,
        ModelKind.TRANSFORMED_EXACT: hamiltonian_exact_interaction,
    }[kind]
    return lambda t: builder(params, coupling, field, t)


def infer_axis(field: FieldModel) -> Axis:
    """Polarization axis of a field with a single nonzero amplitude component.

    A zero field has no preferred axis and maps to x.
    """
    amplitude = getattr(field, "amplitude", (0.0, 0.0, 0.0))
    nonzero = [ax for ax in AXES if amplitude[ax.index] != 0.0]
    if not nonzero:
        return Axis.X
    if len(nonzero) > 1:
        raise ValueError(f"field polarization {amplitude} is not along a single axis")
    return nonzero[0]


def validate_weak_field(
    params: PhysicalParams, field: FieldModel, horizon: float, t0: float = 0.0
) -> float:
    """Largest μ|E(t)|/(ħΓ) over uniform samples of [t0, t0 + horizon].

    Values at or above 1 mean the drive is strong enough to split the
    levels; callers decide whether that is a warning.
    """
    if params.gamma is None:
        raise ValueError("validity ratio requires halfwidth")
    t = np.linspace(t0, t0 + horizon, WEAK_FIELD_SAMPLES)
    E = np.linalg.norm(field_at(field, t), axis=-1)
    return float(abs(params.mu) * E.max() / (params.hbar * params.gamma))
