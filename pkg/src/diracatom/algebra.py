"""
Operator algebra for the four-component two-level atom.

Pauli matrices, the Dirac matrices alpha and beta, the transition matrix
``beta1`` = diag(1, 0, -1, 0) and the block-diagonal spin matrix Sigma,
together with the small set of manipulations the property suite needs.

Matrices are plain ``numpy`` complex128 arrays. Documentation uses 1-based
entry labels, so entry (1, 3) is ``m[0, 2]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

#: Absolute tolerance for exact-structure comparisons.
ATOL = 1e-12


class Axis(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def index(self) -> int:
        return "xyz".index(self.value)


AXES = (Axis.X, Axis.Y, Axis.Z)

_PAULI = {
    Axis.X: ((0, 1), (1, 0)),
    Axis.Y: ((0, -1j), (1j, 0)),
    Axis.Z: ((1, 0), (0, -1)),
}

IDENTITY4 = np.eye(4, dtype=complex)


def pauli(axis) -> np.ndarray:
    return np.array(_PAULI[Axis(axis)], dtype=complex)


def alpha(axis) -> np.ndarray:
    """Block matrix [[0, sigma], [sigma, 0]]."""
    s = pauli(axis)
    z = np.zeros((2, 2), dtype=complex)
    return np.block([[z, s], [s, z]])


def beta() -> np.ndarray:
    return np.diag([1, 1, -1, -1]).astype(complex)


def beta1() -> np.ndarray:
    """Transition-quantum matrix diag(1, 0, -1, 0); not a Dirac generator."""
    return np.diag([1, 0, -1, 0]).astype(complex)


def sigma_big(axis) -> np.ndarray:
    """Block-diagonal spin matrix [[sigma, 0], [0, sigma]]."""
    s = pauli(axis)
    z = np.zeros((2, 2), dtype=complex)
    return np.block([[s, z], [z, s]])


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def parity_conjugate(m: np.ndarray) -> np.ndarray:
    """Return beta @ m @ beta.

    Polar internal operators (alpha) change sign, axial ones (Sigma) do not.
    """
    b = beta()
    return b @ m @ b


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def max_deviation(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def matrices_equal(a: np.ndarray, b: np.ndarray, atol: float = ATOL) -> bool:
    return max_deviation(a, b) <= atol


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    return max_deviation(m, dagger(m)) <= atol


def offdiag_blocks(s: np.ndarray) -> np.ndarray:
    z = np.zeros((2, 2), dtype=complex)
    return np.block([[z, s], [s, z]])


def diag_blocks(s: np.ndarray) -> np.ndarray:
    z = np.zeros((2, 2), dtype=complex)
    return np.block([[s, z], [z, s]])


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    deviation: float
    passed: bool


def _equal_check(name: str, lhs: np.ndarray, rhs: np.ndarray) -> IdentityCheck:
    dev = max_deviation(lhs, rhs)
    return IdentityCheck(name, dev, dev <= ATOL)


def identity_checks() -> list[IdentityCheck]:
    """Run every algebraic identity of the operator set.

    Equality rows report the max-abs deviation and pass at ``ATOL``.
    Rows asserting that ``beta1`` is not a Dirac generator report the
    max-abs entry of the commutator and pass when it exceeds 0.5.
    """
    checks = []
    zero = np.zeros((4, 4), dtype=complex)
    names = {ax: ax.value for ax in AXES}

    for i in AXES:
        for j in AXES:
            expected = 2 * IDENTITY4 if i == j else zero
            checks.append(
                _equal_check(
                    f"{{α_{names[i]}, α_{names[j]}}} = {2 if i == j else 0}·I",
                    anticommutator(alpha(i), alpha(j)),
                    expected,
                )
            )
    for i in AXES:
        checks.append(
            _equal_check(f"{{α_{names[i]}, β}} = 0", anticommutator(alpha(i), beta()), zero)
        )
    checks.append(_equal_check("β² = I", beta() @ beta(), IDENTITY4))

    for i in AXES:
        s = pauli(i)
        checks.append(_equal_check(f"σ_{names[i]}² = I", s @ s, np.eye(2)))
        checks.append(
            _equal_check(f"Σ_{names[i]}² = I", sigma_big(i) @ sigma_big(i), IDENTITY4)
        )

    hermitian = [("β", beta()), ("β¹", beta1())]
    hermitian += [(f"α_{names[i]}", alpha(i)) for i in AXES]
    hermitian += [(f"Σ_{names[i]}", sigma_big(i)) for i in AXES]
    for label, m in hermitian:
        checks.append(_equal_check(f"hermitian: {label} = {label}†", m, dagger(m)))

    for i in AXES:
        checks.append(
            _equal_check(
                f"parity: βα_{names[i]}β = -α_{names[i]}",
                parity_conjugate(alpha(i)),
                -alpha(i),
            )
        )
        checks.append(
            _equal_check(
                f"parity: βΣ_{names[i]}β = Σ_{names[i]}",
                parity_conjugate(sigma_big(i)),
                sigma_big(i),
            )
        )

    checks.append(_equal_check("[β, β¹] = 0", commutator(beta(), beta1()), zero))
    checks.append(_equal_check("[β¹, β¹] = 0", commutator(beta1(), beta1()), zero))
    for i in AXES:
        size = float(np.max(np.abs(commutator(alpha(i), beta1()))))
        checks.append(
            IdentityCheck(f"beta1 not Dirac: [α_{names[i]}, β¹] ≠ 0", size, size > 0.5)
        )

    for i in AXES:
        s = pauli(i)
        checks.append(_equal_check(f"α_{names[i]} = offdiag(σ_{names[i]})", alpha(i), offdiag_blocks(s)))
        checks.append(
            _equal_check(f"Σ_{names[i]} = diag(σ_{names[i]})", sigma_big(i), diag_blocks(s))
        )
    return checks
