"""Ideal pumping algebra: permutations, triplet reset, cycles, closed forms.

The protocol alternates two instantaneous population manipulations:

* cyclic permutations of the populations of the singlet and the two outer
  triplet states (pi_124 sends 1->2->4->1, pi_142 the reverse), and
* the triplet thermal reset Theta, which restores the three triplet
  populations to the thermal shape (1+eps, 1, 1-eps)/3 of their total while
  leaving the singlet population untouched.

A pump of n_p permutations is the step sequence

    even n_p:  (Theta, pi_124, Theta, pi_142) repeated n_p/2 times
    odd  n_p:  the even sequence for n_p-1, then (Theta, pi_124)

read left to right in chronological order.  Applied to thermal equilibrium
the singlet order after n_p permutations is

    SO(n_p) = (-1)^n_p * (eps*sqrt(3)/4) * (1 - 3^-n_p)

whose steady-state magnitude eps*sqrt(3)/4 exceeds the unitary bound
sqrt(2/3)*ZO_eq by a factor 3/2: the reset injects fresh entropy from the
bath between permutations, which no unitary sequence can do.

Engine semantics: populations are propagated to first order in eps, by
evolving the deviation from the uniform state with the eps-linear part of
each step.  Full products of the literal transfer matrices acquire eps^2 cross
terms (the reset matrix is affine in eps) that the closed form above does
not contain; dropping them keeps the engine exactly on the closed form and
makes every downstream ratio independent of eps.  ``TransferMatrix``
objects returned by the matrix constructors are the exact literal
matrices, so matrix-level identities hold without truncation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import (
    SINGLET_ORDER,
    PopulationVector,
    measure_order,
)

COLUMN_SUM_TOL = 1e-12
ENTRY_TOL = 1e-12


class Permutation(enum.Enum):
    """Labels of the three population permutations used by the protocol."""

    PI124 = "pi124"  # 3-cycle: 1 -> 2 -> 4 -> 1
    PI142 = "pi142"  # 3-cycle: 1 -> 4 -> 2 -> 1
    PI12 = "pi12"    # swap:    1 <-> 2


_PERM_MATRICES = {
    Permutation.PI124: np.array(
        [[0, 0, 0, 1],
         [1, 0, 0, 0],
         [0, 0, 1, 0],
         [0, 1, 0, 0]], dtype=float),
    Permutation.PI142: np.array(
        [[0, 1, 0, 0],
         [0, 0, 0, 1],
         [0, 0, 1, 0],
         [1, 0, 0, 0]], dtype=float),
    Permutation.PI12: np.array(
        [[0, 1, 0, 0],
         [1, 0, 0, 0],
         [0, 0, 1, 0],
         [0, 0, 0, 1]], dtype=float),
}

#: Triplet reset at eps = 0: singlet row/column untouched, triplet
#: populations replaced by their mean.
RESET0 = np.array(
    [[1, 0, 0, 0],
     [0, 1 / 3, 1 / 3, 1 / 3],
     [0, 1 / 3, 1 / 3, 1 / 3],
     [0, 1 / 3, 1 / 3, 1 / 3]], dtype=float)

#: Deviation of the thermal state from uniform populations, per unit eps.
THERMAL_DEVIATION = np.array([0.0, 0.25, 0.0, -0.25])


@dataclass(frozen=True)
class TransferMatrix:
    """A column-stochastic 4x4 matrix acting on population vectors.

    Column j holds the destination distribution of the population of state
    j, so every column sums to one (total population is conserved) and all
    entries are nonnegative.  ``tol`` bounds the accepted column-sum
    deviation: the population-algebra constructors use the strict default,
    while matrices derived from numerically propagated unitaries carry the
    propagator's 1e-9 unitarity budget instead.
    """

    m: np.ndarray
    label: str = ""
    tol: float = COLUMN_SUM_TOL

    def __post_init__(self) -> None:
        arr = np.array(self.m, dtype=float, copy=True)
        if arr.shape != (4, 4):
            raise ValueError(f"transfer matrix must be 4x4, got {arr.shape}")
        if arr.min() < -ENTRY_TOL:
            raise ValueError(f"negative entry {arr.min():.3e} in transfer matrix {self.label!r}")
        colsums = arr.sum(axis=0)
        if np.max(np.abs(colsums - 1.0)) > self.tol:
            raise ValueError(
                f"transfer matrix {self.label!r} columns sum to {colsums}, not 1"
            )
        arr[arr < 0.0] = 0.0
        arr.flags.writeable = False
        object.__setattr__(self, "m", arr)

    def apply(self, pop: PopulationVector) -> PopulationVector:
        """Exact matrix action p -> m @ p (no first-order truncation)."""
        return PopulationVector(self.m @ pop.p)

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix(
            self.m @ other.m, label=f"{self.label}@{other.label}", tol=max(self.tol, other.tol)
        )


def permutation_matrix(label: Permutation) -> TransferMatrix:
    """Exact 0/1 matrix of one of the three protocol permutations."""
    try:
        m = _PERM_MATRICES[label]
    except KeyError:
        raise ValueError(f"unknown permutation label {label!r}") from None
    return TransferMatrix(m, label=label.value)


def ideal_reset(eps: float) -> TransferMatrix:
    """Triplet thermal reset at polarization eps.

    Each triplet column is replaced by the thermal triplet shape
    ((1+eps)/3, 1/3, (1-eps)/3); the singlet row and column are untouched.
    The thermal population vector is an exact fixed point.
    """
    if abs(eps) >= 1.0:
        raise ValueError(f"|eps| = {abs(eps)} >= 1: reset matrix would not be stochastic")
    t = np.array([1.0 + eps, 1.0, 1.0 - eps]) / 3.0
    m = np.zeros((4, 4))
    m[0, 0] = 1.0
    for col in (1, 2, 3):
        m[1:, col] = t
    return TransferMatrix(m, label=f"reset(eps={eps!r})")


def cycle_matrix(eps: float) -> TransferMatrix:
    """One full pump cycle as the exact product pi142 . Theta . pi124 . Theta.

    Rightmost factor acts first, matching the chronological step order
    (Theta, pi124, Theta, pi142).  Being a product of two eps-affine
    matrices, this exact form carries an eps^2 term that the first-order
    engine (`run_ideal`) deliberately drops.
    """
    theta = ideal_reset(eps).m
    m = _PERM_MATRICES[Permutation.PI142] @ theta @ _PERM_MATRICES[Permutation.PI124] @ theta
    return TransferMatrix(m, label=f"cycle(eps={eps!r})")


@dataclass(frozen=True)
class Permute:
    label: Permutation


@dataclass(frozen=True)
class Reset:
    pass


@dataclass(frozen=True)
class Evolve:
    duration: float  # seconds of free relaxation; a no-op in the ideal engine


Step = Union[Permute, Reset, Evolve]


@dataclass(frozen=True)
class ProtocolSequence:
    """Ordered protocol steps, chronological (first element acts first)."""

    steps: tuple[Step, ...]

    @classmethod
    def for_permutation_count(cls, n_p: int) -> "ProtocolSequence":
        """Parity-aware pump sequence for n_p permutations.

        Even n_p emits n_p/2 copies of the cycle (Reset, pi124, Reset,
        pi142); odd n_p emits the even sequence for n_p - 1 followed by
        (Reset, pi124).
        """
        if n_p < 0:
            raise ValueError(f"n_p must be >= 0, got {n_p}")
        steps: list[Step] = []
        for _ in range(n_p // 2):
            steps += [Reset(), Permute(Permutation.PI124), Reset(), Permute(Permutation.PI142)]
        if n_p % 2:
            steps += [Reset(), Permute(Permutation.PI124)]
        return cls(tuple(steps))


def reset_deviation(delta: np.ndarray, eps: float) -> np.ndarray:
    """First-order action of the triplet reset on a deviation from uniform.

    The eps-linear part of Theta(eps) applied to p = u/4 + delta is
    Theta(0) @ delta plus the thermal-shape injection eps*(0,1,0,-1)/4;
    the eps*delta cross term is second order and dropped.
    """
    return RESET0 @ delta + eps * THERMAL_DEVIATION


def run_ideal(n_p: int, eps: float) -> PopulationVector:
    """Populations after the ideal pump of n_p permutations from equilibrium.

    First-order engine: the deviation from uniform populations is evolved
    step by step, so `measure_order(run_ideal(n_p, eps), SINGLET_ORDER)`
    reproduces `closed_form_so(n_p, eps)` to machine precision for every
    n_p.
    """
    if n_p < 0:
        raise ValueError(f"n_p must be >= 0, got {n_p}")
    if abs(eps) >= 1.0:
        raise ValueError(f"|eps| = {abs(eps)} >= 1")
    seq = ProtocolSequence.for_permutation_count(n_p)
    delta = eps * THERMAL_DEVIATION
    for step in seq.steps:
        if isinstance(step, Permute):
            delta = _PERM_MATRICES[step.label] @ delta
        elif isinstance(step, Reset):
            delta = reset_deviation(delta, eps)
        # Evolve: no relaxation at this layer
    return PopulationVector(0.25 + delta)


def closed_form_so(n_p: int, eps: float) -> float:
    """Singlet order after n_p permutations: (-1)^n_p (eps sqrt3/4)(1 - 3^-n_p)."""
    if n_p < 0:
        raise ValueError(f"n_p must be >= 0, got {n_p}")
    sign = -1.0 if n_p % 2 else 1.0
    return sign * (eps * np.sqrt(3.0) / 4.0) * (1.0 - 3.0 ** (-n_p))


def ideal_steady_state(eps: float, n_p: int = 20) -> PopulationVector:
    """Even-count pump output with the geometric tail below 1e-9 relative.

    Defined operationally as run_ideal at a large even n_p rather than by
    eigen-decomposition; 3^-20 ~ 3e-10 leaves SO within 1e-9*eps of its
    limit.
    """
    if n_p % 2:
        raise ValueError("steady state is defined for even permutation counts")
    return run_ideal(n_p, eps)


def enhance_zeeman(p_ss: PopulationVector, eps: float) -> PopulationVector:
    """Convert pumped singlet order to Zeeman order: pi12 . Theta(eps) . p.

    A further triplet reset followed by the 1<->2 population swap.  Fed the
    even-n_p steady state this yields ZO = 3*eps/(4*sqrt(2)), i.e. 3/2 of
    the thermal Zeeman order; intended for even-n_p states (not checked).
    First-order semantics, like `run_ideal`.
    """
    delta = p_ss.p - 0.25
    delta = reset_deviation(delta, eps)
    delta = _PERM_MATRICES[Permutation.PI12] @ delta
    return PopulationVector(0.25 + delta)


def ideal_signal(n_p: int, eps: float) -> float:
    """Normalized singlet-filtered signal of the ideal pump.

    Detection model: an ideal rank-0 filter keeps only singlet order, which
    is converted to observable magnetization at the unitary efficiency
    sqrt(2/3); the result is normalized to the thermal-equilibrium signal
    of a 90-degree pulse, i.e. signal = sqrt(2/3)*SO/ZO_eq.  The ideal
    steady state gives exactly 1, singlet order at the unitary bound gives
    2/3.
    """
    so = measure_order(run_ideal(n_p, eps), SINGLET_ORDER)
    return signal_from_singlet_order(so, eps)


def signal_from_singlet_order(so: float, eps: float) -> float:
    """Normalized signal sqrt(2/3)*SO/ZO_eq for polarization eps."""
    if eps == 0.0:
        raise ValueError("signal normalization undefined at eps = 0")
    zo_eq = eps / (2.0 * np.sqrt(2.0))
    return float(np.sqrt(2.0 / 3.0) * so / zo_eq)
