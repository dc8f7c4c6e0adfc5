"""Pulse-level two-spin dynamics: Hamiltonians, shaped pulses, propagators.

Everything here is a 4x4 complex matrix in one of two bases:

* product basis {|aa>, |ab>, |ba>, |bb>} -- spin operators, Hamiltonians
  and propagators are built here;
* singlet-triplet basis (singlet, |aa>, central triplet, |bb>) -- the
  package-wide state indexing, used for population-transfer matrices and
  density operators.

``spin_operators().product_to_st`` holds the unitary whose columns are the
singlet-triplet states expressed in the product basis.

Rotating-frame conventions.  The free Hamiltonian (rad/s) is

    H = w_off*(I1z+I2z) + (w_delta/2)*(I1z-I2z) + 2*pi*J*(I1.I2)

with w_delta = gamma*B0*delta_shift*1e-6 and w_off = 2*pi*offset_hz, the
offset of the *spins* in the frame of the radiofrequency carrier.  A
carrier displaced by +x Hz from the spectrum centre puts the spins at
-x Hz in its frame, so the shaped-pulse labels APSOC(+-) (carrier at
+-35 Hz) enter the Hamiltonian with the opposite sign.  Flipping
``frame_sign`` in `simulate_permutation` flips this bookkeeping globally
and therefore swaps which population cycle each pulse sequence realizes.

The shaped-pulse envelope is a degree-20 polynomial in t/T whose bundled
coefficients are not unit-normalized: `apsoc_amplitude` evaluates the raw
polynomial scaled by ``max_amplitude``, while `apsoc_waveform` rescales
the profile so that its peak over the pulse equals ``max_amplitude``,
which is what the stated peak nutation frequency means physically.  Use
the waveform for dynamics.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Optional

import numpy as np

from .core import N_SO, SpinSystemParams
from .protocol import Permutation, TransferMatrix, permutation_matrix

UNITARITY_TOL = 1e-9
HERMITICITY_TOL = 1e-12

#: Default number of piecewise-constant steps across the shaped pulse
#: (18 us per step at the bundled 0.36 s duration, far below the fastest
#: nutation period).
DEFAULT_PULSE_STEPS = 20000

_SX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
_SY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
_SZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
_E2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpinOperatorSet:
    """Single-spin angular momentum operators of the pair (product basis)."""

    i1x: np.ndarray
    i1y: np.ndarray
    i1z: np.ndarray
    i2x: np.ndarray
    i2y: np.ndarray
    i2z: np.ndarray
    #: Columns are the singlet-triplet states in the product basis.
    product_to_st: np.ndarray


@functools.lru_cache(maxsize=1)
def spin_operators() -> SpinOperatorSet:
    r2 = 1.0 / np.sqrt(2.0)
    v = np.array(
        [[0.0, 1.0, 0.0, 0.0],
         [r2, 0.0, r2, 0.0],
         [-r2, 0.0, r2, 0.0],
         [0.0, 0.0, 0.0, 1.0]],
        dtype=complex,
    )
    mats = dict(
        i1x=np.kron(_SX, _E2),
        i1y=np.kron(_SY, _E2),
        i1z=np.kron(_SZ, _E2),
        i2x=np.kron(_E2, _SX),
        i2y=np.kron(_E2, _SY),
        i2z=np.kron(_E2, _SZ),
        product_to_st=v,
    )
    for m in mats.values():  # the set is a shared cached instance
        m.flags.writeable = False
    return SpinOperatorSet(**mats)


def omega_delta(params: SpinSystemParams) -> float:
    """Chemical-shift frequency difference gamma*B0*delta_shift*1e-6, rad/s."""
    return params.gamma * params.b0 * params.delta_shift * 1e-6


def free_hamiltonian(params: SpinSystemParams, offset_hz: float = 0.0) -> np.ndarray:
    """Rotating-frame Hamiltonian of the coupled pair, rad/s, product basis."""
    ops = spin_operators()
    w_off = 2.0 * np.pi * offset_hz
    w_d = omega_delta(params)
    w_j = 2.0 * np.pi * params.j_coupling
    return (
        w_off * (ops.i1z + ops.i2z)
        + 0.5 * w_d * (ops.i1z - ops.i2z)
        + w_j * (ops.i1x @ ops.i2x + ops.i1y @ ops.i2y + ops.i1z @ ops.i2z)
    )


def ab_spectrum(params: SpinSystemParams) -> list[tuple[float, float]]:
    """The four single-quantum lines of the AB pattern, sorted by frequency.

    Returns (frequency in Hz relative to the spectrum centre, intensity as
    the squared matrix element of I1x+I2x between the eigenstates).  The
    two inner lines are split by sqrt(J^2 + (w_delta/2pi)^2) - J and carry
    the larger intensity; at w_delta = 0 the outer lines vanish exactly.
    """
    h = free_hamiltonian(params, offset_hz=0.0)
    # total Iz is conserved: diagonalize per M sector so the (degenerate)
    # outer states never mix.  Sectors: M=+1 {|aa>}, M=0 {|ab>,|ba>}, M=-1 {|bb>}
    e_up = h[0, 0].real
    e_down = h[3, 3].real
    w, v = np.linalg.eigh(h[1:3, 1:3])
    lines = []
    for k in (0, 1):
        # collective-Ix matrix element is the same for both transitions of
        # each central eigenstate
        amp = float(abs(v[0, k] + v[1, k]) ** 2 / 4.0)
        lines.append((float((e_up - w[k]) / (2.0 * np.pi)), amp))
        lines.append((float((w[k] - e_down) / (2.0 * np.pi)), amp))
    lines.sort(key=lambda fr: fr[0])
    return lines


@dataclass(frozen=True)
class PulseShape:
    """Amplitude-modulated pulse: polynomial profile, peak amplitude, duration.

    Attributes:
        max_amplitude: peak nutation frequency of the waveform in rad/s.
        duration: pulse length in seconds.
        coefficients: the 21 polynomial coefficients of the profile in
            t/duration (arbitrary units; see `apsoc_waveform`).
        offset_hz: carrier offset from the spectrum centre in Hz.
        phase: radiofrequency phase in radians.
    """

    max_amplitude: float = 2.0 * np.pi * 181.0
    duration: float = 0.36
    coefficients: tuple[float, ...] = ()
    offset_hz: float = 0.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(coeffs) != 21:
            raise ValueError(f"need exactly 21 coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_file(cls, path, **kwargs) -> "PulseShape":
        """Load coefficients from a text file, one per line (21 lines)."""
        with open(path, encoding="ascii") as fh:
            coeffs = [float(line) for line in fh if line.strip()]
        return cls(coefficients=tuple(coeffs), **kwargs)

    @classmethod
    def default(cls, offset_hz: float = 0.0, phase: float = 0.0) -> "PulseShape":
        """The bundled adiabatic spin-order-conversion shape."""
        text = (
            resources.files("singletcool").joinpath("data/apsoc_coefficients.txt").read_text()
        )
        coeffs = tuple(float(line) for line in text.splitlines() if line.strip())
        return cls(coefficients=coeffs, offset_hz=offset_hz, phase=phase)

    def profile(self, x: float) -> float:
        """Horner evaluation of the raw polynomial at x = t/duration."""
        s = 0.0
        for c in reversed(self.coefficients):
            s = s * x + c
        return s

    @functools.cached_property
    def profile_extrema(self) -> tuple[float, float]:
        """(min, max) of the raw polynomial over [0, 1] on a dense grid."""
        xs = np.linspace(0.0, 1.0, 20001)
        vals = np.array([self.profile(x) for x in xs])
        return float(vals.min()), float(vals.max())

    @functools.cached_property
    def profile_peak(self) -> float:
        """max |polynomial| over the pulse; the waveform normalizer."""
        lo, hi = self.profile_extrema
        return max(abs(lo), abs(hi))


def apsoc_amplitude(shape: PulseShape, t: float) -> float:
    """Raw polynomial amplitude max_amplitude * sum_i C_i (t/T)^i, rad/s.

    This is the literal coefficient scaling; the tabulated coefficients are
    not unit-normalized, so the value at t = T is several orders of
    magnitude above the physical peak.  Use `apsoc_waveform` for dynamics.
    """
    if not 0.0 <= t <= shape.duration:
        raise ValueError(f"t = {t} outside [0, {shape.duration}]")
    return shape.max_amplitude * shape.profile(t / shape.duration)


def apsoc_waveform(shape: PulseShape, t: float) -> float:
    """Physical nutation frequency at time t: peak-normalized profile, rad/s."""
    return apsoc_amplitude(shape, t) / shape.profile_peak


@dataclass(frozen=True)
class Propagator:
    """A 4x4 unitary, validated to 1e-9 in Frobenius norm."""

    u: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.u, dtype=complex, copy=True)
        if arr.shape != (4, 4):
            raise ValueError(f"propagator must be 4x4, got {arr.shape}")
        defect = np.linalg.norm(arr @ arr.conj().T - np.eye(4))
        if defect > UNITARITY_TOL:
            raise ValueError(f"propagator is not unitary (defect {defect:.3e})")
        arr.flags.writeable = False
        object.__setattr__(self, "u", arr)

    def __matmul__(self, other: "Propagator") -> "Propagator":
        return Propagator(self.u @ other.u)


def _expm_hermitian(h: np.ndarray, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def propagate(
    hamiltonian_of_t: Callable[[float], np.ndarray],
    t_span: tuple[float, float],
    n_steps: int,
) -> Propagator:
    """Time-ordered evolution under a piecewise-constant midpoint rule.

    U = prod_k exp(-i H(t_mid,k) dt), latest factor leftmost; each 4x4
    exponential via Hermitian eigen-decomposition.  Second-order accurate
    in the step size for smooth H(t).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    t0, t1 = t_span
    dt = (t1 - t0) / n_steps
    u = np.eye(4, dtype=complex)
    for k in range(n_steps):
        h = hamiltonian_of_t(t0 + (k + 0.5) * dt)
        if np.linalg.norm(h - h.conj().T) > HERMITICITY_TOL * max(1.0, np.linalg.norm(h)):
            raise ValueError("hamiltonian_of_t returned a non-Hermitian matrix")
        u = _expm_hermitian(h, dt) @ u
    return Propagator(u)


def collective_rotation(angle: float, phase: float) -> Propagator:
    """Hard pulse exp(-i*angle*(Ix cos(phase) + Iy sin(phase))), collective."""
    ops = spin_operators()
    axis = (ops.i1x + ops.i2x) * np.cos(phase) + (ops.i1y + ops.i2y) * np.sin(phase)
    w, v = np.linalg.eigh(axis)
    return Propagator((v * np.exp(-1j * w * angle)) @ v.conj().T)


def composite_pulse_propagator(sign: int = +1, amplitude_scale: float = 1.0) -> Propagator:
    """Composite 90-degree pulse: 180 at phase sign*30, then 90 at sign*150.

    At amplitude_scale = 1 it rotates collective x-magnetization onto the
    -z axis for sign = +1 (+z for sign = -1), and it stays close to that
    target under amplitude miscalibration (the scale multiplies both flip
    angles).
    """
    if amplitude_scale <= 0.0:
        raise ValueError("amplitude_scale must be positive")
    u1 = collective_rotation(np.pi * amplitude_scale, sign * np.deg2rad(30.0))
    u2 = collective_rotation(0.5 * np.pi * amplitude_scale, sign * np.deg2rad(150.0))
    return u2 @ u1


def magnetization_overlap(prop: Propagator, sign: int = +1) -> float:
    """Overlap of U (I1x+I2x) U+ with the target -sign*(I1z+I2z), in [-1, 1]."""
    ops = spin_operators()
    ix = ops.i1x + ops.i2x
    iz = ops.i1z + ops.i2z
    rotated = prop.u @ ix @ prop.u.conj().T
    return float(np.real(np.trace(rotated @ (-sign * iz))) / 2.0)


#: Carrier offsets (Hz) of the shaped pulse for each population cycle:
#: the 1->2->4->1 cycle uses the carrier below the spectrum centre.
CARRIER_OFFSETS = {Permutation.PI124: -35.0, Permutation.PI142: +35.0}
_COMPOSITE_SIGNS = {Permutation.PI124: +1, Permutation.PI142: -1}


def simulate_permutation(
    kind: Permutation,
    params: SpinSystemParams,
    shape: Optional[PulseShape] = None,
    n_steps: int = DEFAULT_PULSE_STEPS,
    frame_sign: int = +1,
) -> tuple[TransferMatrix, float]:
    """Full pulse sequence of one permutation: shaped pulse, then composite 90.

    The population-transfer matrix T_st = |<s|U|t>|^2 is returned in the
    singlet-triplet basis together with the fidelity trace(P^T T)/4
    against the target permutation matrix P.  T is doubly stochastic for
    any unitary U.

    ``frame_sign`` flips the Larmor-sign bookkeeping (spin offset and
    composite-pulse phases); flipping it makes each sequence realize the
    opposite cycle.
    """
    if kind not in (Permutation.PI124, Permutation.PI142):
        raise ValueError(f"no pulse sequence for permutation {kind!r}")
    if frame_sign not in (+1, -1):
        raise ValueError("frame_sign must be +1 or -1")
    if shape is None:
        shape = PulseShape.default(offset_hz=CARRIER_OFFSETS[kind])

    # carrier displaced by +x Hz puts the spins at -x Hz in its frame
    spin_offset_hz = -frame_sign * shape.offset_hz
    ops = spin_operators()
    h0 = free_hamiltonian(params, offset_hz=spin_offset_hz)
    rf_axis = (ops.i1x + ops.i2x) * np.cos(shape.phase) + (ops.i1y + ops.i2y) * np.sin(
        shape.phase
    )

    def h_of_t(t: float) -> np.ndarray:
        return h0 + apsoc_waveform(shape, t) * rf_axis

    u_pulse = propagate(h_of_t, (0.0, shape.duration), n_steps)
    u_comp = composite_pulse_propagator(sign=frame_sign * _COMPOSITE_SIGNS[kind])
    u_total = u_comp @ u_pulse

    v = spin_operators().product_to_st
    u_st = v.conj().T @ u_total.u @ v
    transfer = np.abs(u_st) ** 2
    target = permutation_matrix(kind).m
    fidelity = float(np.trace(target.T @ transfer) / 4.0)
    # column sums inherit the propagator's unitarity budget, not the strict
    # population-algebra tolerance
    return TransferMatrix(transfer, label=f"pulse_{kind.value}", tol=UNITARITY_TOL), fidelity


#: Singlet-order operator in the singlet-triplet basis (unit Frobenius norm,
#: traceless); its expectation on a diagonal state is the SO observable.
SO_OPERATOR_ST = np.diag(N_SO * np.array([1.0, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0])).astype(
    complex
)


def t00_project(rho: np.ndarray) -> np.ndarray:
    """Ideal rank-0 filter: keep only the identity and singlet-order parts.

    Operates on a Hermitian unit-trace density operator in the
    singlet-triplet basis.  All coherences and every population pattern
    orthogonal to singlet order (Zeeman order included) are zeroed; the
    projection is idempotent and trace-preserving.
    """
    arr = np.asarray(rho, dtype=complex)
    if arr.shape != (4, 4):
        raise ValueError(f"density operator must be 4x4, got {arr.shape}")
    if np.linalg.norm(arr - arr.conj().T) > 1e-9:
        raise ValueError("density operator must be Hermitian")
    if abs(np.trace(arr) - 1.0) > 1e-9:
        raise ValueError("density operator must have unit trace")
    so_part = np.real(np.trace(SO_OPERATOR_ST @ arr))  # tr(Q^2) = 1
    return np.trace(arr) * np.eye(4, dtype=complex) / 4.0 + so_part * SO_OPERATOR_ST
