"""Derived quantities on states and trajectories."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from diracatom.algebra import AXES, alpha, pauli, sigma_big
from diracatom.model import CouplingKind

# imaginary residue tolerated in an expectation value of a Hermitian operator
IMAG_TOL = 1e-12
# peak must exceed this multiple of the median spectral magnitude
PEAK_TO_MEDIAN = 3.0
# signals with a smaller peak-to-peak swing count as constant
FLAT_TOL = 1e-9
MIN_SAMPLES = 16
# zero-padding factor for the interpolated spectrum
PAD_FACTOR = 8

FOUR_COMPONENT_COLUMNS = (
    "t", "norm", "pop1", "pop2", "pop3", "pop4",
    "pop_radiant", "pop_absorptive", "dx", "dy", "dz",
)
TWO_COMPONENT_COLUMNS = ("t", "norm", "pop_upper", "pop_lower", "dx", "dy", "dz")


def norm(state) -> float | np.ndarray:
    """Euclidean norm; broadcasts over leading axes of a stack of states."""
    return np.sqrt(np.sum(np.abs(np.asarray(state)) ** 2, axis=-1))


def populations(state) -> np.ndarray:
    return np.abs(np.asarray(state)) ** 2


def block_populations(state):
    """(radiant, absorptive) = (|ψ1|²+|ψ2|², |ψ3|²+|ψ4|²)."""
    p = populations(state)
    if p.shape[-1] != 4:
        raise ValueError("block populations need a four-component state")
    return p[..., 0] + p[..., 1], p[..., 2] + p[..., 3]


def _dipole_operators(coupling, dimension: int) -> np.ndarray:
    coupling = CouplingKind(coupling)
    if coupling is CouplingKind.NONE:
        raise ValueError("dipole expectation needs a coupling (AlphaE or SigmaE)")
    if dimension == 2:
        return np.stack([pauli(ax) for ax in AXES])
    build = alpha if coupling is CouplingKind.ALPHA_E else sigma_big
    return np.stack([build(ax) for ax in AXES])


def dipole_expectation(state, coupling, mu: float) -> np.ndarray:
    """μ⟨ψ|K_i|ψ⟩ for K = α or Σ (μ⟨σ_i⟩ for a two-component state).

    Accepts a single state or a stack; returns shape ``(..., 3)``.
    """
    psi = np.asarray(state, dtype=complex)
    K = _dipole_operators(coupling, psi.shape[-1])
    values = np.einsum("...j,ijk,...k->...i", psi.conj(), K, psi)
    scale = max(1.0, float(np.max(np.abs(psi)) ** 2))
    if np.max(np.abs(values.imag), initial=0.0) > IMAG_TOL * scale:
        raise RuntimeError("dipole expectation has an imaginary part; operator not Hermitian?")
    return mu * values.real


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    norm: float
    pops: tuple[float, ...]
    pop_radiant: float | None
    pop_absorptive: float | None
    dipole_expect: tuple[float, float, float]

    @classmethod
    def from_state(cls, t, state, coupling, mu) -> "ObservableRecord":
        psi = np.asarray(state, dtype=complex)
        if psi.shape[-1] == 4:
            radiant, absorptive = (float(x) for x in block_populations(psi))
        else:
            radiant = absorptive = None
        return cls(
            float(t),
            float(norm(psi)),
            tuple(float(p) for p in populations(psi)),
            radiant,
            absorptive,
            tuple(float(d) for d in dipole_expectation(psi, coupling, mu)),
        )


def observable_columns(times, states, coupling, mu) -> dict[str, np.ndarray]:
    """Column arrays of the CSV row schema, in header order."""
    states = np.asarray(states, dtype=complex)
    pops = populations(states)
    d = dipole_expectation(states, coupling, mu)
    cols = {"t": np.asarray(times, dtype=float), "norm": norm(states)}
    if states.shape[1] == 4:
        for i in range(4):
            cols[f"pop{i + 1}"] = pops[:, i]
        cols["pop_radiant"], cols["pop_absorptive"] = block_populations(states)
    else:
        cols["pop_upper"], cols["pop_lower"] = pops[:, 0], pops[:, 1]
    cols["dx"], cols["dy"], cols["dz"] = d[:, 0], d[:, 1], d[:, 2]
    return cols


Selector = Union[str, int, Callable[[np.ndarray], np.ndarray]]


def select_signal(states: np.ndarray, selector: Selector = "auto") -> np.ndarray:
    """Pick a real signal out of a stack of states.

    ``selector`` is a 1-based component index, a CSV column name
    (``pop1`` ... ``pop4``, ``pop_upper``, ``pop_lower``, ``pop_radiant``,
    ``pop_absorptive``), ``"auto"`` for the component population with the
    largest swing, or a callable mapping the state stack to a signal.
    """
    states = np.asarray(states)
    if callable(selector):
        return np.asarray(selector(states), dtype=float)
    pops = populations(states)
    if isinstance(selector, (int, np.integer)):
        return pops[:, int(selector) - 1]
    if selector == "auto":
        return pops[:, int(np.argmax(np.ptp(pops, axis=0)))]
    named = {"pop_upper": 0, "pop_lower": 1}
    if states.shape[1] == 4:
        named = {f"pop{i + 1}": i for i in range(4)}
        if selector in ("pop_radiant", "pop_absorptive"):
            radiant, absorptive = block_populations(states)
            return radiant if selector == "pop_radiant" else absorptive
    if selector not in named:
        raise ValueError(f"unknown signal selector {selector!r}")
    return pops[:, named[selector]]


def dominant_frequency(times, signal) -> float:
    """Dominant angular frequency of a uniformly sampled real signal.

    The mean is removed, a Hann window applied, and the peak of the
    magnitude spectrum (DC excluded) is located, then refined by parabolic
    interpolation on an 8x zero-padded spectrum. Raw resolution is
    2π/span. A trailing sample whose spacing differs from the rest (a
    shortened final step) is dropped.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(signal, dtype=float)
    if len(t) >= 3:
        spacing = np.diff(t)
        if not np.isclose(spacing[-1], spacing[0], rtol=1e-9, atol=0.0):
            t, x = t[:-1], x[:-1]
    if len(t) < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} uniform samples, got {len(t)}")
    step = (t[-1] - t[0]) / (len(t) - 1)
    if not np.allclose(np.diff(t), step, rtol=1e-6, atol=0.0):
        raise ValueError("samples are not uniformly spaced")

    x = x - x.mean()
    if np.ptp(x) <= FLAT_TOL * max(1.0, float(np.max(np.abs(signal)))):
        raise ValueError("no oscillation detected")
    x = x * np.hanning(len(x))
    coarse = np.abs(np.fft.rfft(x))[1:]
    if coarse.max() <= PEAK_TO_MEDIAN * np.median(coarse):
        raise ValueError("no oscillation detected")

    nfft = 1 << int(np.ceil(np.log2(PAD_FACTOR * len(x))))
    fine = np.abs(np.fft.rfft(x, nfft))
    k = 1 + int(np.argmax(fine[1:]))
    offset = 0.0
    if k + 1 < len(fine):
        a, b, c = fine[k - 1], fine[k], fine[k + 1]
        denom = a - 2 * b + c
        if denom != 0:
            offset = 0.5 * (a - c) / denom
    omega = 2 * np.pi * (k + offset) / (nfft * step)

    span = t[-1] - t[0]
    if omega * span < 4 * np.pi:
        raise ValueError("no oscillation detected: fewer than two periods in the span")
    return float(omega)


def oscillation_frequency(traj, component_selector: Selector = "auto") -> float:
    """Dominant angular frequency of a population signal of ``traj``."""
    return dominant_frequency(traj.times, select_signal(traj.states, component_selector))
