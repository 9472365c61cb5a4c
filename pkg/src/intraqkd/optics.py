"""Linear-optical elements acting on the spin (x) path space, and the five bases.

Every element is a frozen dataclass with ``unitary()`` (4x4 on the particle),
``inverse()`` and ``joint_unitary(theta_sc)`` (16x16 on particle (x) envR (x)
envT).  Only the diagonal quarter-wave plate couples to the environment: when
the photon passes the plate in arm D, the radiation mode of D is rotated from
``|0>`` to ``|Y> = cos(t)|0> + sin(t)|1>``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Sequence, Union

import numpy as np

from .qstate import (
    KET_0,
    KET_1,
    KET_MINUS,
    KET_PLUS,
    KET_R,
    KET_T,
    KET_V,
    NORM_TOL,
    DensityOperator,
    StateVector,
    inner,
    particle,
    pauli_dot,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
)

Arm = Literal["R", "T"]
ARM_INDEX = {"R": 0, "T": 1}
SQRT_HALF = 1 / np.sqrt(2)

_I2 = np.eye(2, dtype=complex)


def _arm_projector(arm: Arm) -> np.ndarray:
    p = np.zeros((2, 2), dtype=complex)
    i = ARM_INDEX[arm]
    p[i, i] = 1
    return p


def _spin_on_arm(spin_op: np.ndarray, arm: Arm) -> np.ndarray:
    p = _arm_projector(arm)
    return np.kron(spin_op, p) + np.kron(_I2, _I2 - p)


def env_rotation(theta_sc: float) -> np.ndarray:
    """Single-mode map ``|0> -> |Y>`` completed to a rotation."""
    c, s = np.cos(theta_sc), np.sin(theta_sc)
    return np.array([[c, -s], [s, c]], dtype=complex)


class _Element:
    leaks = False

    def unitary(self) -> np.ndarray:
        raise NotImplementedError

    def inverse(self):
        raise NotImplementedError

    def joint_unitary(self, theta_sc: float = 0.0) -> np.ndarray:
        return np.kron(self.unitary(), np.eye(4))


@dataclass(frozen=True)
class BeamSplitter(_Element):
    """Acts on the path only: [[a, i b e^{i phi}], [i b e^{-i phi}, a]] in (R, T).

    The conjugate phase on the lower entry keeps the splitter lossless for any
    phi; at phi = 0 both off-diagonal entries are i b.
    """

    alpha: float = SQRT_HALF
    beta: float = SQRT_HALF
    phase: float = 0.0

    def __post_init__(self):
        if abs(self.alpha**2 + self.beta**2 - 1) > NORM_TOL:
            raise ValueError(f"alpha^2 + beta^2 = {self.alpha**2 + self.beta**2} != 1")

    def path_matrix(self) -> np.ndarray:
        up = 1j * self.beta * np.exp(1j * self.phase)
        down = 1j * self.beta * np.exp(-1j * self.phase)
        return np.array([[self.alpha, up], [down, self.alpha]], dtype=complex)

    def unitary(self):
        return np.kron(_I2, self.path_matrix())

    def inverse(self):
        return BeamSplitter(self.alpha, self.beta, self.phase + np.pi)


@dataclass(frozen=True)
class HalfWavePlate(_Element):
    """|H> <-> |V> on one arm."""

    arm: Arm

    def unitary(self):
        return _spin_on_arm(PAULI_X, self.arm)

    def inverse(self):
        return self


# |0> -> |+>, |1> -> |->, written in the (|H>, |V>) column representation.
_QWP_DIAGONAL = np.column_stack([KET_MINUS, KET_PLUS])


@dataclass(frozen=True)
class QuarterWavePlate(_Element):
    """Quarter-wave plate on one arm.

    ``mode="diagonal"`` is the plate that rotates |0>, |1> onto |+>, |->; it is
    the element carrying the radiative side channel.  ``mode="retarder"`` is an
    axis-aligned plate, |1> -> i^sign |1>, used for the circular bases.
    """

    arm: Arm
    mode: Literal["diagonal", "retarder"] = "diagonal"
    sign: int = 1

    @property
    def leaks(self) -> bool:
        return self.mode == "diagonal"

    def spin_matrix(self) -> np.ndarray:
        if self.mode == "diagonal":
            return _QWP_DIAGONAL.astype(complex)
        return np.diag([1j**self.sign, 1]).astype(complex)

    def unitary(self):
        return _spin_on_arm(self.spin_matrix(), self.arm)

    def inverse(self):
        if self.mode == "diagonal":
            return self
        return QuarterWavePlate(self.arm, self.mode, -self.sign)

    def joint_unitary(self, theta_sc: float = 0.0) -> np.ndarray:
        if not self.leaks or theta_sc == 0:
            return super().joint_unitary(theta_sc)
        p = _arm_projector(self.arm)
        rot = env_rotation(theta_sc)
        env = np.kron(rot, _I2) if self.arm == "R" else np.kron(_I2, rot)
        on_arm = np.kron(np.kron(self.spin_matrix(), p), env)
        off_arm = np.kron(np.kron(_I2, _I2 - p), np.eye(4))
        return on_arm + off_arm


@dataclass(frozen=True)
class PhaseShifter(_Element):
    arm: Arm
    phi: float

    def unitary(self):
        d = np.ones(2, dtype=complex)
        d[ARM_INDEX[self.arm]] = np.exp(1j * self.phi)
        return np.kron(_I2, np.diag(d))

    def inverse(self):
        return PhaseShifter(self.arm, -self.phi)


@dataclass(frozen=True)
class Mirror(_Element):
    """Reflection in one arm; contributes the pi/2 reflection phase."""

    arm: Arm

    def unitary(self):
        return PhaseShifter(self.arm, np.pi / 2).unitary()

    def inverse(self):
        return PhaseShifter(self.arm, -np.pi / 2)


OpticalElement = Union[BeamSplitter, HalfWavePlate, QuarterWavePlate, PhaseShifter, Mirror]


@dataclass(frozen=True)
class Circuit:
    """Ordered optical elements; ``elements[0]`` acts first."""

    elements: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def unitary(self) -> np.ndarray:
        u = np.eye(4, dtype=complex)
        for el in self.elements:
            u = el.unitary() @ u
        return u

    def joint_unitary(self, theta_sc: float = 0.0) -> np.ndarray:
        u = np.eye(16, dtype=complex)
        for el in self.elements:
            u = el.joint_unitary(theta_sc) @ u
        return u

    @property
    def uses_leaky_plate(self) -> bool:
        return any(el.leaks for el in self.elements)

    def apply(self, state: StateVector, theta_sc: float = 0.0) -> StateVector:
        if state.dims == (2, 2):
            return state.evolve(self.unitary())
        if len(state.dims) == 4:
            return state.evolve(self.joint_unitary(theta_sc))
        raise ValueError(f"unsupported dims {state.dims}")

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(self.elements + tuple(other.elements))

    def __len__(self):
        return len(self.elements)


def element_unitary(el: OpticalElement) -> np.ndarray:
    return el.unitary()


def reverse_circuit(c: Circuit) -> Circuit:
    return Circuit(tuple(el.inverse() for el in reversed(c.elements)))


# ---------------------------------------------------------------------------
# Bases


class BasisLabel(enum.Enum):
    G1 = "G1"
    G2 = "G2"
    G3 = "G3"
    G4 = "G4"
    G5 = "G5"


@dataclass(frozen=True, eq=False)
class BasisSet:
    label: BasisLabel
    names: tuple
    states: tuple
    circuits: tuple
    source: StateVector = field(default_factory=lambda: INPUT_STATE)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i) -> StateVector:
        return self.states[i]

    def matrix(self) -> np.ndarray:
        """Columns are the basis states."""
        return np.column_stack([s.amplitudes for s in self.states])


INPUT_STATE = particle(KET_V, KET_T)

HADAMARD = (PAULI_Z + PAULI_X) / np.sqrt(2)
HADAMARD_Y = (PAULI_Z + PAULI_Y) / np.sqrt(2)

_G1_PRODUCTS = [(KET_0, KET_T), (KET_1, KET_T), (KET_0, KET_R), (KET_1, KET_R)]


def _entangled(spin_t, spin_r, sign):
    amps = particle(spin_t, KET_T).amplitudes + sign * 1j * particle(spin_r, KET_R).amplitudes
    return StateVector(amps / np.sqrt(2))


def _closed_form(label: BasisLabel) -> tuple[tuple[str, ...], list[StateVector]]:
    if label is BasisLabel.G1:
        return ("Psi+", "Psi-", "Psi*+", "Psi*-"), [particle(s, p) for s, p in _G1_PRODUCTS]
    if label is BasisLabel.G2:
        names = ("Phi+", "Phi-", "Phi*+", "Phi*-")
        pairs = [(KET_PLUS, KET_MINUS), (KET_MINUS, KET_PLUS)]
    elif label is BasisLabel.G3:
        names = ("Lambda+", "Lambda-", "Lambda*+", "Lambda*-")
        cp = (KET_0 + 1j * KET_1) / np.sqrt(2)
        cm = (KET_0 - 1j * KET_1) / np.sqrt(2)
        pairs = [(cp, cm), (cm, cp)]
    else:
        h = HADAMARD if label is BasisLabel.G4 else HADAMARD_Y
        names = tuple(f"{label.value}.{k}" for k in range(4))
        return names, [particle(h @ s, h @ p) for s, p in _G1_PRODUCTS]
    states = [_entangled(t, r, sign) for t, r in pairs for sign in (1, -1)]
    return names, states


def _both(el_type, **kw):
    return [el_type(arm="R", **kw), el_type(arm="T", **kw)]


def _core_circuit(label: BasisLabel, k: int) -> list:
    """Elements taking |V>|T> to basis element ``k`` up to a global phase."""
    if label is BasisLabel.G1:
        return [
            [],
            [HalfWavePlate("T")],
            [BeamSplitter(0.0, 1.0)],
            [BeamSplitter(0.0, 1.0), HalfWavePlate("R")],
        ][k]
    if label in (BasisLabel.G2, BasisLabel.G3):
        # BS, then HWP on R (Phi) or T (Phi*), a pi shift on R for the minus
        # members, and diagonal plates on both arms.
        els = [BeamSplitter(), HalfWavePlate("R" if k < 2 else "T")]
        if k % 2:
            els.append(PhaseShifter("R", np.pi))
        els += _both(QuarterWavePlate)
        if label is BasisLabel.G3:
            els += _both(QuarterWavePlate, mode="retarder")
        return els
    # Separable bases: spin flip if needed, BS + phase for the path, plates on both arms.
    spin_one = k % 2 == 1
    path_r = k >= 2
    els = []
    if label is BasisLabel.G4:
        if not spin_one:
            els.append(HalfWavePlate("T"))
        els.append(BeamSplitter())
        els.append(PhaseShifter("R", -np.pi / 2 if path_r else np.pi / 2))
        els += _both(QuarterWavePlate)
    else:
        if spin_one:
            els.append(HalfWavePlate("T"))
        els.append(BeamSplitter())
        if path_r:
            els.append(PhaseShifter("R", np.pi))
        els += _both(QuarterWavePlate)
        els += _both(QuarterWavePlate, mode="retarder")
    return els


def _phase_fixed(core: list, target: StateVector) -> Circuit:
    c = Circuit(core)
    amp = inner(target, c.apply(INPUT_STATE))
    if abs(abs(amp) - 1) > NORM_TOL:
        raise AssertionError(f"circuit reaches target only with |overlap| = {abs(amp)}")
    gamma = np.angle(amp)
    if abs(gamma) > 1e-15:
        c = c + Circuit(_both(PhaseShifter, phi=-gamma))
    return c


@lru_cache(maxsize=None)
def prepare_basis(label: BasisLabel | str) -> BasisSet:
    """The four states of a basis and, per state, a circuit preparing it from |V>|T>."""
    label = BasisLabel(label)
    names, states = _closed_form(label)
    circuits = tuple(_phase_fixed(_core_circuit(label, k), s) for k, s in enumerate(states))
    return BasisSet(label, names, tuple(states), circuits)


def basis_labels() -> list[BasisLabel]:
    return list(BasisLabel)


def mub_overlap_table(b1: BasisSet, b2: BasisSet, tol: float = 1e-10) -> np.ndarray:
    """Table of |<b1_i|b2_j>|^2."""
    m1, m2 = b1.matrix(), b2.matrix()
    for m in (m1, m2):
        if not np.allclose(m.conj().T @ m, np.eye(4), atol=tol, rtol=0):
            raise ValueError("basis is not orthonormal")
    return np.abs(m1.conj().T @ m2) ** 2


# ---------------------------------------------------------------------------
# Measurements


def _as_density(state) -> np.ndarray:
    if isinstance(state, DensityOperator):
        return state.matrix
    a = state.amplitudes
    return np.outer(a, a.conj())


def derotation(n: Sequence[float]) -> np.ndarray:
    """Rows <n+|, <n-|: sends the n.sigma eigenbasis to the computational one.

    For the path qubit this is a biased splitter with transmission cos(t/2)
    and reflection e^{i phi} sin(t/2), phases absorbed at the output ports.
    """
    n = _unit(n)
    theta = np.arctan2(np.hypot(n[0], n[1]), n[2])
    phi = np.arctan2(n[1], n[0])
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    plus = np.array([c, np.exp(1j * phi) * s])
    minus = np.array([-np.exp(-1j * phi) * s, c])
    return np.vstack([plus.conj(), minus.conj()])


def _unit(v, tol: float = 1e-9) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > tol:
        raise ValueError(f"expected a unit 3-vector, got {v}")
    return v


def derotation_measurement(state, a: Sequence[float], b: Sequence[float]) -> dict:
    """Outcome distribution of (a.sigma) (x) (b.sigma), keyed by (spin, path) = (+-1, +-1).

    The path is de-rotated by a biased splitter; both arms then carry the same
    polarization analyzer along ``a``.
    """
    u = np.kron(derotation(a), derotation(b))
    rho = u @ _as_density(state) @ u.conj().T
    p = np.clip(np.real(np.diag(rho)), 0, None)
    signs = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    return {s: float(pk) for s, pk in zip(signs, p)}


def correlation_from_counts(dist: dict) -> float:
    return sum(sa * sb * p for (sa, sb), p in dist.items())


@lru_cache(maxsize=None)
def analyzer_unitary(label: BasisLabel | str) -> np.ndarray:
    """Bob's analyzer: maps the k-th element of the basis onto detector k."""
    return prepare_basis(label).matrix().conj().T


def bob_analyzer(state, basis: BasisLabel | str) -> np.ndarray:
    """Probabilities of Bob's four detector outcomes when analyzing in ``basis``."""
    w = analyzer_unitary(BasisLabel(basis))
    if isinstance(state, StateVector):
        p = np.abs(w @ state.amplitudes) ** 2
    else:
        p = np.real(np.diag(w @ state.matrix @ w.conj().T))
    p = np.clip(p, 0, None)
    return p / p.sum()
