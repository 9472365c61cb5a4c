"""Eve: depolarizing intercept-resend on the channel, and the wave-plate side channel.

Joint states live on spin (x) path (x) envR (x) envT.  ``PI0`` projects the two
radiation modes onto the joint vacuum |0_R, 0_T>.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .optics import INPUT_STATE, BasisLabel, bob_analyzer, prepare_basis
from .qstate import (
    JOINT_DIMS,
    PARTICLE_DIMS,
    DensityOperator,
    StateVector,
    basis_ket,
    maximally_mixed,
    partial_trace,
    tensor,
)

PI0_OUTCOME, NOT_PI0_OUTCOME, NO_PI0 = "pi0", "not_pi0", "n/a"

DEFAULT_PAIR = (BasisLabel.G1, BasisLabel.G2)
SIDE_CHANNEL_BASES = (BasisLabel.G1, BasisLabel.G2, BasisLabel.G4)

ENV_VACUUM = StateVector(basis_ket(0, 4), (2, 2))
PI0 = np.kron(np.eye(4), np.outer(ENV_VACUUM.amplitudes, ENV_VACUUM.amplitudes))


@dataclass(frozen=True)
class InterceptResendConfig:
    f: float = 0.0
    eve_bases: tuple = DEFAULT_PAIR

    def __post_init__(self):
        if not 0 <= self.f <= 1:
            raise ValueError(f"attack fraction f = {self.f} outside [0, 1]")
        object.__setattr__(self, "eve_bases", tuple(BasisLabel(b) for b in self.eve_bases))


@dataclass(frozen=True)
class SideChannelConfig:
    theta_sc: float = 0.0

    def __post_init__(self):
        if not 0 <= self.theta_sc <= np.pi / 2 + 1e-12:
            raise ValueError(f"theta_sc = {self.theta_sc} outside [0, pi/2]")


@dataclass(frozen=True)
class EveRecord:
    pi0_outcome: str = NO_PI0
    intercepted: bool = False
    measured_basis: Optional[BasisLabel] = None
    measured_element: Optional[int] = None
    known_bits: int = 0


def depolarize(rho: DensityOperator, f: float) -> DensityOperator:
    """Average effect of intercepting a fraction f: (1 - f/2) rho + (f/2) I/4."""
    if not 0 <= f <= 1:
        raise ValueError(f"f = {f} outside [0, 1]")
    mixed = maximally_mixed(rho.dims).matrix
    return DensityOperator((1 - f / 2) * rho.matrix + (f / 2) * mixed, rho.dims)


def _measure(state, basis: BasisLabel, rng) -> int:
    p = bob_analyzer(state, basis)
    return int(rng.choice(4, p=p))


def intercept_resend(
    state: StateVector,
    rng: np.random.Generator,
    config: InterceptResendConfig,
    announced_basis: Optional[BasisLabel] = None,
) -> tuple[StateVector, EveRecord]:
    """One photon through the channel; Eve re-prepares whatever she measured.

    ``announced_basis`` is Alice's later basis announcement, used to decide
    whether Eve ends up knowing the symbol.
    """
    if rng.random() >= config.f:
        return state, EveRecord()
    basis = config.eve_bases[rng.integers(len(config.eve_bases))]
    k = _measure(state, basis, rng)
    known = 2 if announced_basis is not None and BasisLabel(announced_basis) is basis else 0
    forwarded = prepare_basis(basis)[k]
    return forwarded, EveRecord(NO_PI0, True, basis, k, known)


# ---------------------------------------------------------------------------
# Side channel


def _element_index(element, basis: BasisLabel) -> int:
    if isinstance(element, (int, np.integer)):
        return int(element)
    for k, s in enumerate(prepare_basis(basis).states):
        if s.allclose(element, atol=1e-9):
            return k
    raise ValueError(f"state is not an element of {basis.value}")


def qwp_attack_prepare(element, basis: BasisLabel | str, sc: SideChannelConfig) -> StateVector:
    """Alice's preparation of ``element`` with the leaky plates; returns the 16-dim joint state."""
    basis = BasisLabel(basis)
    if basis not in SIDE_CHANNEL_BASES:
        raise ValueError(f"side-channel preparation not modeled for {basis.value}")
    k = _element_index(element, basis)
    circuit = prepare_basis(basis).circuits[k]
    joint_in = tensor(INPUT_STATE, ENV_VACUUM)
    return circuit.apply(joint_in, sc.theta_sc)


def device_error(sc: SideChannelConfig) -> float:
    return 0.5 * np.sin(sc.theta_sc) ** 2


def pi0_probability(joint: StateVector) -> float:
    a = joint.amplitudes
    return float(np.real(np.vdot(a, PI0 @ a)))


def eve_pi0_measure(joint: StateVector, rng: np.random.Generator) -> tuple[str, StateVector]:
    """Project the radiation modes on {PI0, 1 - PI0}; returns outcome and renormalized post-state."""
    p0 = pi0_probability(joint)
    if p0 > 1 - 1e-12 or rng.random() < p0:
        return PI0_OUTCOME, StateVector(PI0 @ joint.amplitudes, joint.dims).normalize()
    post = joint.amplitudes - PI0 @ joint.amplitudes
    return NOT_PI0_OUTCOME, StateVector(post, joint.dims).normalize()


def particle_of(joint: StateVector) -> DensityOperator:
    return partial_trace(joint, keep=[0, 1])


def pristine_particle(joint: StateVector) -> StateVector:
    """Particle factor of a joint state whose environment is in the vacuum."""
    vac = joint.amplitudes.reshape(4, 4)[:, 0]
    return StateVector(vac, PARTICLE_DIMS).normalize()


def eve_posterior_g1(pi0_seen: bool, sc: SideChannelConfig, p1: float) -> float:
    """P(G1 | Eve's leak outcome) with G1 chosen a priori with probability p1."""
    if not pi0_seen:
        return 0.0
    c2 = np.cos(sc.theta_sc) ** 2
    s2 = np.sin(sc.theta_sc) ** 2
    return p1 / (c2 + p1 * s2)


def prefers_g1(sc: SideChannelConfig, p1: float) -> bool:
    c2 = np.cos(sc.theta_sc) ** 2
    return p1 > c2 / (1 + c2)


def disturbed_basis(
    basis: BasisLabel | str = BasisLabel.G2, sc: SideChannelConfig = SideChannelConfig(np.pi / 2)
) -> tuple[StateVector, ...]:
    """(1 - PI0)|element, env> normalized, for every element of ``basis``."""
    if sc.theta_sc == 0:
        raise ValueError("theta_sc = 0: no emission, (1 - PI0) annihilates every element")
    out = []
    for k in range(4):
        joint = qwp_attack_prepare(k, basis, sc)
        out.append(StateVector(joint.amplitudes - PI0 @ joint.amplitudes, JOINT_DIMS).normalize())
    return tuple(out)


def _disturbed_measure(joint: StateVector, basis: BasisLabel, sc, rng) -> int:
    states = disturbed_basis(basis, sc)
    p = np.array([abs(np.vdot(s.amplitudes, joint.amplitudes)) ** 2 for s in states])
    return int(rng.choice(4, p=p / p.sum()))


def _swap_env_on_T() -> np.ndarray:
    swap = np.eye(4)[[0, 2, 1, 3]]
    p_t = np.diag([0.0, 1.0])
    return np.kron(np.eye(2), np.kron(np.eye(2) - p_t, np.eye(4)) + np.kron(p_t, swap))


ALIGN_ENV = _swap_env_on_T()


def align_environment(joint: StateVector) -> StateVector:
    """Swap the leak modes when the photon is in T; factors |0_R, Y_T> branches onto |Y_R, 0_T>.

    After this the particle is back in its pristine state and the environment
    alone records whether the plates fired.  Eve can do this on the channel
    without measuring anything.
    """
    return joint.evolve(ALIGN_ENV)


def side_channel_strategy(
    joint: StateVector,
    rng: np.random.Generator,
    f: float,
    p1: float,
    sc: SideChannelConfig,
    announced_basis: Optional[BasisLabel] = None,
    eve_bases: Sequence[BasisLabel] = DEFAULT_PAIR,
    restore_untouched: bool = True,
) -> tuple[StateVector | DensityOperator, EveRecord]:
    """Eve's leak-assisted intercept-resend on one photon.

    Intercepted photons (probability f): PI0 on the raw joint state.  After
    1 - PI0 the basis is known to be the entangled one and the disturbed
    element is identified exactly; after PI0 Eve measures in a random basis.
    Either way the identified pristine element is re-prepared and forwarded.

    Untouched photons: with ``restore_untouched`` Eve first aligns the
    environment so the photon goes on undisturbed, then reads PI0 for basis
    information only.  Without it the leak modes stay entangled with the
    photon, which Bob then receives as a mixed state.

    ``p1`` is accepted for symmetry with the analytic model; Eve's random basis
    choice after PI0 is uniform regardless.
    """
    eve_bases = tuple(BasisLabel(b) for b in eve_bases)
    entangled_basis = eve_bases[1]
    announced = BasisLabel(announced_basis) if announced_basis is not None else None
    if rng.random() < f:
        outcome, post = eve_pi0_measure(joint, rng)
        if outcome == NOT_PI0_OUTCOME:
            basis = entangled_basis
            k = _disturbed_measure(post, basis, sc, rng)
            known = 2
        else:
            basis = eve_bases[rng.integers(len(eve_bases))]
            k = _measure(pristine_particle(post), basis, rng)
            known = 2 if basis is announced else 0
        return prepare_basis(basis)[k], EveRecord(outcome, True, basis, k, known)

    if restore_untouched:
        aligned = align_environment(joint)
        outcome, post = eve_pi0_measure(aligned, rng)
        return _particle_factor(post), EveRecord(outcome, False)
    outcome, post = eve_pi0_measure(joint, rng)
    if outcome == PI0_OUTCOME:
        return pristine_particle(post), EveRecord(outcome, False)
    return particle_of(post), EveRecord(outcome, False)


def _particle_factor(joint: StateVector) -> StateVector:
    """Particle state of a product joint state (largest Schmidt component)."""
    m = joint.amplitudes.reshape(4, 4)
    u, s, _ = np.linalg.svd(m)
    if s[1] > 1e-9:
        raise ValueError("joint state is not a product state")
    # fix the global phase so the largest amplitude is real-positive
    v = u[:, 0]
    v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
    return StateVector(v, PARTICLE_DIMS)
