"""CHSH correlations, the measurement settings, bounds and Werner thresholds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .qstate import (
    PAULIS,
    DensityOperator,
    StateVector,
    particle,
    pauli_dot,
    to_density,
    werner,
)

CLASSICAL_BOUND = 2.0
SEPARABLE_BOUND = np.sqrt(2)
TSIRELSON_BOUND = 2 * np.sqrt(2)

_X = np.array([1.0, 0.0, 0.0])
_Y = np.array([0.0, 1.0, 0.0])
_D = (_X + _Y) / np.sqrt(2)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > 1e-12:
        raise ValueError(f"not a unit 3-vector: {v}")
    return v


@dataclass(frozen=True, eq=False)
class MeasurementSettings:
    """Spin settings a1, a2 and path settings b1, b2 (a3, b3 carried but unused)."""

    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    a3: Optional[np.ndarray] = None
    b3: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2", "a3", "b3"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _unit(v))

    def as_dict(self) -> dict:
        return {
            k: getattr(self, k).tolist()
            for k in ("a1", "a2", "b1", "b2", "a3", "b3")
            if getattr(self, k) is not None
        }


# Settings as printed: they give S = 0 on the singlet.
PRINTED_SETTINGS = MeasurementSettings(
    a1=_X, a2=_Y, b1=_D, b2=(-_X + _Y) / np.sqrt(2), a3=_D, b3=_Y
)
# b2 with the sign flipped; the singlet then reaches -2 sqrt(2).
CORRECTED_SETTINGS = MeasurementSettings(
    a1=_X, a2=_Y, b1=_D, b2=(_X - _Y) / np.sqrt(2), a3=_D, b3=_Y
)


@dataclass(frozen=True, eq=False)
class BellReport:
    S: float
    settings: MeasurementSettings
    S_optimal: float = float("nan")
    classical_bound: float = CLASSICAL_BOUND
    separable_bound: float = SEPARABLE_BOUND
    tsirelson: float = TSIRELSON_BOUND
    notes: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "S": self.S,
            "S_optimal": self.S_optimal,
            "settings": self.settings.as_dict(),
            "classical_bound": self.classical_bound,
            "separable_bound": self.separable_bound,
            "tsirelson": self.tsirelson,
            "violates_classical": abs(self.S) > self.classical_bound,
            "violates_separable": abs(self.S) > self.separable_bound,
            "notes": list(self.notes),
        }


def singlet() -> StateVector:
    """(|HV> - |VH>)/sqrt2 with the path qubit read as the second qubit."""
    from .qstate import KET_H, KET_R, KET_T, KET_V  # path |R>,|T> play |0>,|1>

    amps = particle(KET_H, KET_T).amplitudes - particle(KET_V, KET_R).amplitudes
    return StateVector(amps / np.sqrt(2))


def _matrix(rho) -> np.ndarray:
    if isinstance(rho, StateVector):
        rho = to_density(rho)
    if rho.dims != (2, 2):
        raise ValueError(f"expected a two-qubit state, got dims {rho.dims}")
    return rho.matrix


def correlation(rho, a, b) -> float:
    """E(a, b) = Tr[rho (a.sigma) (x) (b.sigma)]."""
    m = _matrix(rho)
    return float(np.real(np.trace(m @ np.kron(pauli_dot(a), pauli_dot(b)))))


def correlation_matrix(rho) -> np.ndarray:
    """T_ij = Tr[rho sigma_i (x) sigma_j]."""
    m = _matrix(rho)
    return np.array(
        [[np.real(np.trace(m @ np.kron(si, sj))) for sj in PAULIS] for si in PAULIS]
    )


def chsh(rho, s: MeasurementSettings = CORRECTED_SETTINGS) -> float:
    t = correlation_matrix(rho)
    e = lambda a, b: a @ t @ b  # noqa: E731
    return float(e(s.a1, s.b1) + e(s.a2, s.b1) + e(s.a1, s.b2) - e(s.a2, s.b2))


def _orthogonal_unit(v: np.ndarray) -> np.ndarray:
    trial = _X if abs(v[0]) < 0.9 else _Y
    w = trial - (trial @ v) * v
    return w / np.linalg.norm(w)


def chsh_optimal(rho) -> tuple[float, MeasurementSettings]:
    """Maximal |S| over all settings, from the two largest singular values of T.

    Returns the value and settings achieving it (with S > 0).
    """
    t = correlation_matrix(rho)
    u, sv, vt = np.linalg.svd(t)
    s1, s2 = sv[0], sv[1]
    value = 2 * np.sqrt(s1**2 + s2**2)
    if value == 0:
        return 0.0, CORRECTED_SETTINGS
    alpha = np.arctan2(s2, s1)
    v1, v2 = vt[0], vt[1]
    a1 = u[:, 0]
    a2 = u[:, 1] if s2 > 0 else _orthogonal_unit(a1)
    settings = MeasurementSettings(
        a1=a1 / np.linalg.norm(a1),
        a2=a2 / np.linalg.norm(a2),
        b1=np.cos(alpha) * v1 + np.sin(alpha) * v2,
        b2=np.cos(alpha) * v1 - np.sin(alpha) * v2,
    )
    return float(value), settings


def _sphere(theta, phi) -> np.ndarray:
    return np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )


def chsh_search(rho, restarts: int = 20, seed: int = 0) -> float:
    """Maximal |S| by random-restart local optimization over the four directions."""
    t = correlation_matrix(rho)
    rng = np.random.default_rng(seed)

    def neg_abs_s(x):
        a1, a2, b1, b2 = (_sphere(x[2 * i], x[2 * i + 1]) for i in range(4))
        s = a1 @ t @ (b1 + b2) + a2 @ t @ (b1 - b2)
        return -abs(s)

    best = 0.0
    for _ in range(restarts):
        x0 = rng.uniform(0, 2 * np.pi, 8)
        res = minimize(neg_abs_s, x0, method="BFGS")
        best = max(best, -res.fun)
    return float(best)


def product_state(theta_a, phi_a, theta_b, phi_b) -> DensityOperator:
    """|n_a><n_a| (x) |n_b><n_b| from Bloch angles."""

    def qubit(theta, phi):
        return 0.5 * (np.eye(2) + pauli_dot(_sphere(theta, phi)))

    return DensityOperator(np.kron(qubit(theta_a, phi_a), qubit(theta_b, phi_b)))


def _product_chsh(angles: np.ndarray, s: MeasurementSettings) -> np.ndarray:
    """CHSH values for a batch of product states, angles shape (n, 4)."""
    na = _sphere(angles[:, 0], angles[:, 1]).T
    nb = _sphere(angles[:, 2], angles[:, 3]).T
    rho_a = 0.5 * (np.eye(2) + np.einsum("nk,kij->nij", na, np.array(PAULIS)))
    rho_b = 0.5 * (np.eye(2) + np.einsum("nk,kij->nij", nb, np.array(PAULIS)))
    rho = np.einsum("nij,nkl->nikjl", rho_a, rho_b).reshape(-1, 4, 4)

    def e(a, b):
        op = np.kron(pauli_dot(a), pauli_dot(b))
        return np.real(np.einsum("nij,ji->n", rho, op))

    return e(s.a1, s.b1) + e(s.a2, s.b1) + e(s.a1, s.b2) - e(s.a2, s.b2)


def separable_bound_search(
    trials: int,
    settings: MeasurementSettings = CORRECTED_SETTINGS,
    seed: int = 0,
    refine: int = 8,
    chunk: int = 20_000,
) -> float:
    """Largest |S| over random product states, polished by local optimization.

    Product states are drawn uniformly on each Bloch sphere; the ``refine``
    best candidates are then optimized over (theta_a, phi_a, theta_b, phi_b).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    best_vals, best_x = [], []
    for start in range(0, trials, chunk):
        n = min(chunk, trials - start)
        ang = np.column_stack(
            [
                np.arccos(rng.uniform(-1, 1, n)),
                rng.uniform(0, 2 * np.pi, n),
                np.arccos(rng.uniform(-1, 1, n)),
                rng.uniform(0, 2 * np.pi, n),
            ]
        )
        vals = np.abs(_product_chsh(ang, settings))
        top = np.argsort(vals)[-refine:]
        best_vals.extend(vals[top])
        best_x.extend(ang[top])
    order = np.argsort(best_vals)[-refine:]
    best = max(best_vals)
    for i in order:
        res = minimize(
            lambda x: -abs(_product_chsh(x[None, :], settings)[0]),
            best_x[i],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
        )
        best = max(best, -res.fun)
    return float(best)


def threshold_e_LR() -> float:
    """Channel error below which the Werner state violates CHSH."""
    return 0.75 * (1 - 1 / np.sqrt(2))


def threshold_e_ent() -> float:
    """Channel error below which the Werner state is entangled."""
    return 0.5


def werner_s(e: float, target: Optional[StateVector] = None) -> float:
    if target is None:
        from .optics import BasisLabel, prepare_basis

        target = prepare_basis(BasisLabel.G2)[0]
    return chsh_optimal(werner(e, target))[0]


def werner_s_closed_form(e: float) -> float:
    return (1 - 4 * e / 3) * TSIRELSON_BOUND


def bell_b_printed(theta_sc: float) -> float:
    """Attacked-state violation as printed; exceeds Tsirelson for theta < pi/2."""
    return TSIRELSON_BOUND * (1 + np.cos(theta_sc) ** 2)


def bell_b_fidelity(theta_sc: float) -> float:
    """2 sqrt2 F with F = 1 - sin^2(theta)/2, i.e. sqrt2 (1 + cos^2 theta)."""
    return np.sqrt(2) * (1 + np.cos(theta_sc) ** 2)
