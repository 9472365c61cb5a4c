"""Pure and mixed states on the spin (polarization) x path space of one photon.

Column-vector conventions follow the photon's lab description::

    |H> = |1> = (1, 0)      |V> = |0> = (0, 1)       (spin)
    |R>       = (1, 0)      |T>       = (0, 1)       (path)

Subsystems are ordered spin, path, envR, envT, so the particle index is
``2 * spin + path`` and the ordering of the four particle amplitudes is
(H.R, H.T, V.R, V.T).  The two environment qubits hold the radiation modes
leaked by the quarter-wave plates: ``|0> -> (1, 0)`` and
``|Y> -> (cos t, sin t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

SPIN, PATH, ENV_R, ENV_T = 0, 1, 2, 3

PARTICLE_DIMS = (2, 2)
JOINT_DIMS = (2, 2, 2, 2)

NORM_TOL = 1e-12
EIG_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitude vector with its subsystem dimensions."""

    amplitudes: np.ndarray
    dims: tuple[int, ...] = PARTICLE_DIMS

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != amps.size:
            raise ValueError(f"dims {dims} do not match {amps.size} amplitudes")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        n = self.norm
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.dims)

    def evolve(self, unitary: np.ndarray) -> "StateVector":
        return StateVector(np.asarray(unitary) @ self.amplitudes, self.dims)

    def allclose(self, other: "StateVector", atol: float = NORM_TOL) -> bool:
        return self.dims == other.dims and np.allclose(
            self.amplitudes, other.amplitudes, atol=atol, rtol=0
        )

    def __repr__(self):
        return f"StateVector({np.round(self.amplitudes, 6).tolist()}, dims={self.dims})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Density matrix with its subsystem dimensions."""

    matrix: np.ndarray
    dims: tuple[int, ...] = PARTICLE_DIMS

    def __post_init__(self):
        m = _frozen(self.matrix)
        dims = tuple(int(d) for d in self.dims)
        d = int(np.prod(dims))
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_valid(self, tol: float = NORM_TOL, eig_tol: float = EIG_TOL) -> bool:
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=tol, rtol=0):
            return False
        if abs(np.trace(m) - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh(m).min() >= -eig_tol)

    def evolve(self, unitary: np.ndarray) -> "DensityOperator":
        u = np.asarray(unitary)
        return DensityOperator(u @ self.matrix @ u.conj().T, self.dims)


def basis_ket(index: int, dim: int = 2) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


# Single-qubit kets in the lab representation.
KET_H = KET_1 = basis_ket(0)
KET_V = KET_0 = basis_ket(1)
KET_R = basis_ket(0)
KET_T = basis_ket(1)
KET_PLUS = (KET_0 + KET_1) / np.sqrt(2)
KET_MINUS = (KET_0 - KET_1) / np.sqrt(2)


def particle(spin: np.ndarray, path: np.ndarray) -> StateVector:
    """Product particle state ``spin (x) path``."""
    return tensor(StateVector(spin, (2,)), StateVector(path, (2,)))


def tensor(a: StateVector, b: StateVector, *rest: StateVector) -> StateVector:
    def _two(x, y):
        return StateVector(np.kron(x.amplitudes, y.amplitudes), x.dims + y.dims)

    return reduce(_two, rest, _two(a, b))


def _check_dims(a, b):
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    _check_dims(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def to_density(v: StateVector) -> DensityOperator:
    a = v.amplitudes
    return DensityOperator(np.outer(a, a.conj()), v.dims)


def maximally_mixed(dims: Sequence[int] = PARTICLE_DIMS) -> DensityOperator:
    d = int(np.prod(dims))
    return DensityOperator(np.eye(d) / d, tuple(dims))


def werner(e: float, target: StateVector) -> DensityOperator:
    """``(1 - 4e/3)|t><t| + (4e/3) I/4``: the channel-error parametrized Werner state."""
    w = 1 - 4 * e / 3
    return DensityOperator(
        w * to_density(target).matrix + (1 - w) * np.eye(4) / 4, target.dims
    )


def _check_indices(indices, n):
    for i in indices:
        if not 0 <= i < n:
            raise IndexError(f"subsystem index {i} out of range for {n} subsystems")


def partial_trace(rho: DensityOperator | StateVector, keep: Sequence[int]) -> DensityOperator:
    """Trace out every subsystem not listed in ``keep`` (kept in ascending order)."""
    if isinstance(rho, StateVector):
        rho = to_density(rho)
    dims = rho.dims
    n = len(dims)
    keep = sorted(set(keep))
    _check_indices(keep, n)
    t = rho.matrix.reshape(dims + dims)
    rows = list(range(n))
    cols = [i if i not in keep else n + i for i in range(n)]
    out = keep + [n + k for k in keep]
    reduced = np.einsum(t, rows + cols, out)
    d = int(np.prod([dims[k] for k in keep]))
    return DensityOperator(reduced.reshape(d, d), tuple(dims[k] for k in keep))


def _require_two_qubit(rho: DensityOperator):
    if rho.dims != (2, 2):
        raise ValueError(f"expected a two-qubit operator, got dims {rho.dims}")


def partial_transpose(rho: DensityOperator, subsystem: int = PATH) -> np.ndarray:
    _require_two_qubit(rho)
    _check_indices([subsystem], 2)
    t = rho.matrix.reshape(2, 2, 2, 2)
    if subsystem == SPIN:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(4, 4)


def is_entangled_ppt(rho: DensityOperator, tol: float = EIG_TOL) -> bool:
    """Peres-Horodecki test; exact for two qubits."""
    pt = partial_transpose(rho, PATH)
    return bool(np.linalg.eigvalsh((pt + pt.conj().T) / 2).min() < -tol)


def purity(rho: DensityOperator) -> float:
    m = rho.matrix
    return float(np.real(np.einsum("ij,ji->", m, m)))


def fidelity_to(v: StateVector | DensityOperator, target: StateVector) -> float:
    """|<target|v>|^2, or <target|rho|target> for a mixed ``v``."""
    _check_dims(v, target)
    if isinstance(v, DensityOperator):
        t = target.amplitudes
        return float(np.real(np.vdot(t, v.matrix @ t)))
    return abs(inner(target, v)) ** 2


def pauli_dot(n: Sequence[float]) -> np.ndarray:
    """``n . sigma`` for a real 3-vector ``n``."""
    return sum(c * p for c, p in zip(n, PAULIS))


def is_unitary(u: np.ndarray, tol: float = NORM_TOL) -> bool:
    u = np.asarray(u)
    return np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0)
