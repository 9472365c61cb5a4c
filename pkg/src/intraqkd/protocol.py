"""Seeded Monte-Carlo run of the two-basis protocol, plus the analytic key-rate table.

Per photon: Alice picks a basis (prior p1 on the first) and an element, and
prepares it, through the leaky plates if a side channel is configured.  A
fraction g of photons is kept back and checked by reversing the preparation.
The rest pass Eve and are analyzed by Bob in a uniformly random basis.
Rounds with mismatched bases are sifted away.

All quantum quantities are computed once per (basis, element) from the
state-level primitives in ``optics`` and ``attacks``; the photon loop then only
samples from those tables.  Photons are processed in fixed blocks, each with
its own child seed, so the transcript depends on the seed alone and not on
how many workers ran the blocks.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import lru_cache
from typing import IO, Iterator, Optional

import numpy as np

from . import bell, infotheory
from .attacks import (
    NO_PI0,
    NOT_PI0_OUTCOME,
    PI0,
    PI0_OUTCOME,
    InterceptResendConfig,
    SideChannelConfig,
    disturbed_basis,
    particle_of,
    pi0_probability,
    qwp_attack_prepare,
)
from .optics import INPUT_STATE, BasisLabel, Circuit, bob_analyzer, prepare_basis, reverse_circuit
from .qstate import StateVector

BLOCK_SIZE = 8192
ALLOWED_PAIRS = ((BasisLabel.G1, BasisLabel.G2), (BasisLabel.G1, BasisLabel.G4))


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    g: float = 0.0
    p1: float = 0.5
    basis_pair: tuple = ALLOWED_PAIRS[0]
    attack: InterceptResendConfig = field(default_factory=InterceptResendConfig)
    side_channel: Optional[SideChannelConfig] = None
    abort_threshold_e: Optional[float] = None
    seed: int = 0
    disclosure: float = 1.0
    restore_untouched: bool = True
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "basis_pair", tuple(BasisLabel(b) for b in self.basis_pair))
        if self.n < 1:
            raise ValueError("photon count n must be >= 1")
        if not 0 <= self.g < 1:
            raise ValueError(f"verification fraction g = {self.g} outside [0, 1)")
        if not 0 <= self.p1 <= 1:
            raise ValueError(f"p1 = {self.p1} outside [0, 1]")
        if self.basis_pair not in ALLOWED_PAIRS:
            raise ValueError(f"basis pair {self.basis_pair} not supported")
        if self.abort_threshold_e is not None and not 0 < self.abort_threshold_e <= 3 / 8:
            raise ValueError(f"abort threshold {self.abort_threshold_e} outside (0, 3/8]")
        if not 0 < self.disclosure <= 1:
            raise ValueError(f"disclosure fraction {self.disclosure} outside (0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def theta_sc(self) -> float:
        return 0.0 if self.side_channel is None else self.side_channel.theta_sc

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "g": self.g,
            "p1": self.p1,
            "basis_pair": [b.value for b in self.basis_pair],
            "f": self.attack.f,
            "theta_sc": None if self.side_channel is None else self.side_channel.theta_sc,
            "abort_threshold_e": self.abort_threshold_e,
            "seed": self.seed,
            "disclosure": self.disclosure,
            "restore_untouched": self.restore_untouched,
        }


# ---------------------------------------------------------------------------
# Verification


def verification_failure_probability(prepared: StateVector, circuit: Circuit) -> float:
    """Probability that reversing ``circuit`` on the particle does not return |V>|T>."""
    undo = np.kron(reverse_circuit(circuit).unitary(), np.eye(4))
    amps = (undo @ prepared.amplitudes).reshape(4, 4)
    k = int(np.argmax(np.abs(INPUT_STATE.amplitudes)))
    return float(max(0.0, 1 - np.sum(np.abs(amps[k]) ** 2)))


def verification_step(prepared: StateVector, circuit: Circuit, rng: np.random.Generator) -> bool:
    """Alice's reversal check on one photon; True when it fails."""
    return bool(rng.random() < verification_failure_probability(prepared, circuit))


# ---------------------------------------------------------------------------
# Per-(basis, element) tables


@dataclass(frozen=True, eq=False)
class _Tables:
    fail: np.ndarray  # (2, 4)
    p0: np.ndarray  # (2, 4)
    eve_cdf: np.ndarray  # (2, 4, 2, 4): after PI0, Eve measuring in basis e
    disturbed_cdf: np.ndarray  # (2, 4, 4): after 1 - PI0, in the entangled basis
    bob_cdf: np.ndarray  # (16, 2, 4): forwarded state id x Bob basis


def _cdf(p: np.ndarray) -> np.ndarray:
    c = np.cumsum(p, axis=-1)
    c[..., -1] = 1.0
    return c


@lru_cache(maxsize=64)
def _tables(pair: tuple, theta_sc: float, restore: bool) -> _Tables:
    sc = SideChannelConfig(theta_sc)
    fail = np.zeros((2, 4))
    p0 = np.zeros((2, 4))
    eve = np.zeros((2, 4, 2, 4))
    dist = np.zeros((2, 4, 4))
    forwarded: list = [None] * 16
    disturbed = disturbed_basis(pair[1], sc) if theta_sc > 0 else None
    for b, label in enumerate(pair):
        basis = prepare_basis(label)
        for k in range(4):
            joint = qwp_attack_prepare(k, label, sc)
            fail[b, k] = verification_failure_probability(joint, basis.circuits[k])
            p0[b, k] = min(1.0, pi0_probability(joint))
            pristine = basis[k]
            forwarded[4 * b + k] = pristine
            for e, eve_label in enumerate(pair):
                eve[b, k, e] = bob_analyzer(pristine, eve_label)
            if p0[b, k] < 1 - 1e-12:
                post = joint.amplitudes - PI0 @ joint.amplitudes
                post = StateVector(post, joint.dims).normalize()
                p = np.array([abs(np.vdot(s.amplitudes, post.amplitudes)) ** 2 for s in disturbed])
                dist[b, k] = p / p.sum()
                forwarded[8 + 4 * b + k] = pristine if restore else particle_of(post)
            else:
                dist[b, k] = np.full(4, 0.25)
                forwarded[8 + 4 * b + k] = pristine
    bob = np.array([[bob_analyzer(s, label) for label in pair] for s in forwarded])
    return _Tables(fail, p0, _cdf(eve), _cdf(dist), _cdf(bob))


def _sample(cdf_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    return (u[:, None] >= cdf_rows).sum(axis=1).clip(max=cdf_rows.shape[-1] - 1)


# ---------------------------------------------------------------------------
# Transcript


_COLUMNS = (
    "alice_basis",
    "alice_element",
    "verified",
    "verify_failed",
    "pi0",
    "intercepted",
    "eve_basis",
    "eve_element",
    "known_bits",
    "bob_basis",
    "bob_element",
    "sifted",
    "disclosed",
    "error",
)


@dataclass(eq=False)
class Transcript:
    """Column-per-field photon records.  Basis columns hold indices into ``basis_pair``;
    -1 marks fields that do not apply (e.g. Bob's columns for verified photons).
    ``pi0`` is 1 for PI0, 0 for 1 - PI0, -1 when no leak was read."""

    basis_pair: tuple
    alice_basis: np.ndarray
    alice_element: np.ndarray
    verified: np.ndarray
    verify_failed: np.ndarray
    pi0: np.ndarray
    intercepted: np.ndarray
    eve_basis: np.ndarray
    eve_element: np.ndarray
    known_bits: np.ndarray
    bob_basis: np.ndarray
    bob_element: np.ndarray
    sifted: np.ndarray
    disclosed: np.ndarray
    error: np.ndarray

    def __len__(self):
        return len(self.alice_basis)

    @classmethod
    def concat(cls, pair, parts: list[dict]) -> "Transcript":
        return cls(pair, **{c: np.concatenate([p[c] for p in parts]) for c in _COLUMNS})

    def equals(self, other: "Transcript") -> bool:
        return self.basis_pair == other.basis_pair and all(
            np.array_equal(getattr(self, c), getattr(other, c)) for c in _COLUMNS
        )

    def records(self) -> Iterator[dict]:
        labels = [b.value for b in self.basis_pair]
        pi0_names = {1: PI0_OUTCOME, 0: NOT_PI0_OUTCOME, -1: NO_PI0}
        for i in range(len(self)):
            ab = int(self.alice_basis[i])
            verified = bool(self.verified[i])
            rec = {
                "photon": i,
                "alice_basis": labels[ab],
                "alice_element": int(self.alice_element[i]),
                "verified": verified,
            }
            if verified:
                rec["verify_failed"] = bool(self.verify_failed[i])
            else:
                eb = int(self.eve_basis[i])
                rec.update(
                    pi0=pi0_names[int(self.pi0[i])],
                    intercepted=bool(self.intercepted[i]),
                    eve_basis=labels[eb] if eb >= 0 else None,
                    eve_element=int(self.eve_element[i]) if eb >= 0 else None,
                    known_bits=int(self.known_bits[i]),
                    bob_basis=labels[int(self.bob_basis[i])],
                    bob_element=int(self.bob_element[i]),
                    sifted=bool(self.sifted[i]),
                    disclosed=bool(self.disclosed[i]),
                    error=bool(self.error[i]),
                )
            yield rec

    def write_jsonl(self, fh: IO[str]) -> None:
        for rec in self.records():
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def _run_block(cfg: ProtocolConfig, seed_seq: np.random.SeedSequence, n: int) -> dict:
    t = _tables(cfg.basis_pair, cfg.theta_sc, cfg.restore_untouched)
    rng = np.random.default_rng(seed_seq)
    # Fixed draw order and count per block, independent of the parameters.
    ab = (rng.random(n) >= cfg.p1).astype(np.int8)
    ak = rng.integers(0, 4, n).astype(np.int8)
    verified = rng.random(n) < cfg.g
    u_fail = rng.random(n)
    u_pi0 = rng.random(n)
    u_int = rng.random(n)
    eve_b = rng.integers(0, 2, n).astype(np.int8)
    u_eve = rng.random(n)
    bob_b = rng.integers(0, 2, n).astype(np.int8)
    u_bob = rng.random(n)
    u_disc = rng.random(n)

    verify_failed = verified & (u_fail < t.fail[ab, ak])
    transmitted = ~verified
    p0 = t.p0[ab, ak]
    pi0 = (p0 > 1 - 1e-12) | (u_pi0 < p0)
    intercepted = transmitted & (u_int < cfg.attack.f)

    eve_b = np.where(pi0, eve_b, 1).astype(np.int8)
    eve_k_pi0 = _sample(t.eve_cdf[ab, ak, eve_b], u_eve)
    eve_k_dist = _sample(t.disturbed_cdf[ab, ak], u_eve)
    eve_k = np.where(pi0, eve_k_pi0, eve_k_dist).astype(np.int8)

    untouched_id = np.where(pi0, 4 * ab + ak, 8 + 4 * ab + ak)
    fwd = np.where(intercepted, 4 * eve_b + eve_k, untouched_id)
    bob_k = _sample(t.bob_cdf[fwd, bob_b], u_bob).astype(np.int8)

    sifted = transmitted & (bob_b == ab)
    known = np.where(intercepted & (~pi0 | (eve_b == ab)), 2, 0).astype(np.int8)
    side = cfg.side_channel is not None
    neg = np.int8(-1)
    return {
        "alice_basis": ab,
        "alice_element": ak,
        "verified": verified,
        "verify_failed": verify_failed,
        "pi0": np.where(transmitted & side, pi0.astype(np.int8), neg).astype(np.int8),
        "intercepted": intercepted,
        "eve_basis": np.where(intercepted, eve_b, neg).astype(np.int8),
        "eve_element": np.where(intercepted, eve_k, neg).astype(np.int8),
        "known_bits": known,
        "bob_basis": np.where(transmitted, bob_b, neg).astype(np.int8),
        "bob_element": np.where(transmitted, bob_k, neg).astype(np.int8),
        "sifted": sifted,
        "disclosed": sifted & (u_disc < cfg.disclosure),
        "error": sifted & (bob_k != ak),
    }


def _block_task(args):
    return _run_block(*args)


def simulate(cfg: ProtocolConfig) -> Transcript:
    n_blocks = math.ceil(cfg.n / BLOCK_SIZE)
    seeds = np.random.SeedSequence(cfg.seed).spawn(n_blocks)
    sizes = [min(BLOCK_SIZE, cfg.n - i * BLOCK_SIZE) for i in range(n_blocks)]
    tasks = [(cfg, s, m) for s, m in zip(seeds, sizes)]
    if cfg.workers > 1 and n_blocks > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_block_task, tasks))
    else:
        parts = [_block_task(t) for t in tasks]
    return Transcript.concat(cfg.basis_pair, parts)


# ---------------------------------------------------------------------------
# Report


@dataclass(frozen=True)
class ProtocolReport:
    n: int
    n_verified: int
    n_transmitted: int
    sifted_length: int
    disclosed_length: int
    e_A_observed: float
    e_A_conditioned: float
    e_A_by_basis: dict
    e_observed: float
    e_sigma: float
    eve_info_observed: float
    eve_info_sigma: float
    F_estimate: float
    scenario: str
    key_rate_estimate: float
    abort_threshold_e: float
    aborted: bool
    e_predicted: float
    e_A_predicted: float
    eve_info_predicted: float
    e_LR: float = field(default_factory=bell.threshold_e_LR)
    e_ent: float = field(default_factory=bell.threshold_e_ent)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _ratio(num: int, den: int) -> float:
    return num / den if den else float("nan")


def predicted(cfg: ProtocolConfig) -> dict:
    """Closed-form expectations for the configured attack."""
    f, p1 = cfg.attack.f, cfg.p1
    s2 = np.sin(cfg.theta_sc) ** 2
    p_pi0 = 1 - (1 - p1) * s2
    e = (3 * f / 8) * p_pi0
    if not cfg.restore_untouched:
        # untouched photons that radiated reach Bob dephased: half of them err
        e += (1 - f) * (1 - p1) * 0.5 * s2
    return {
        "e": e,
        "e_A": 0.5 * s2,
        "eve_info": f * (1 + (1 - p1) * s2),
        "P_pi0": p_pi0,
    }


def abort_decision(e_observed: float, abort_threshold_e: float) -> bool:
    return bool(e_observed > abort_threshold_e)


def report(cfg: ProtocolConfig, tr: Transcript) -> ProtocolReport:
    verified = tr.verified
    n_ver = int(verified.sum())
    by_basis = {}
    for b, label in enumerate(tr.basis_pair):
        m = verified & (tr.alice_basis == b)
        by_basis[label.value] = _ratio(int(tr.verify_failed[m].sum()), int(m.sum()))
    e_a_pooled = _ratio(int(tr.verify_failed.sum()), n_ver)
    e_a_cond = by_basis[tr.basis_pair[1].value]

    disclosed = tr.disclosed
    n_disc = int(disclosed.sum())
    e_obs = _ratio(int(tr.error[disclosed].sum()), n_disc)
    e_sigma = math.sqrt(e_obs * (1 - e_obs) / n_disc) if n_disc else float("nan")
    sifted = tr.sifted
    n_sift = int(sifted.sum())
    kb = tr.known_bits[sifted].astype(float)
    eve_info = float(kb.mean()) if n_sift else float("nan")
    eve_sigma = float(kb.std() / math.sqrt(n_sift)) if n_sift else float("nan")

    if n_ver and not math.isnan(e_a_cond):
        scenario = infotheory.Scenario.SIDE_CHANNEL
        F = float(min(1.0, max(0.5, 1 - e_a_cond)))
    else:
        scenario = infotheory.Scenario.CONVENTIONAL
        F = 1.0
    try:
        rate = infotheory.key_rate(infotheory.RateInputs(e_obs, F, cfg.p1, scenario))
    except ValueError:
        rate = float("nan")
    if cfg.abort_threshold_e is not None:
        threshold = cfg.abort_threshold_e
    else:
        try:
            threshold = infotheory.solve_threshold(scenario, F, cfg.p1)
        except ValueError:
            threshold = 0.0
    pred = predicted(cfg)
    return ProtocolReport(
        n=len(tr),
        n_verified=n_ver,
        n_transmitted=len(tr) - n_ver,
        sifted_length=n_sift,
        disclosed_length=n_disc,
        e_A_observed=e_a_pooled,
        e_A_conditioned=e_a_cond,
        e_A_by_basis=by_basis,
        e_observed=e_obs,
        e_sigma=e_sigma,
        eve_info_observed=eve_info,
        eve_info_sigma=eve_sigma,
        F_estimate=F,
        scenario=scenario.value,
        key_rate_estimate=rate,
        abort_threshold_e=threshold,
        aborted=abort_decision(e_obs, threshold),
        e_predicted=pred["e"],
        e_A_predicted=pred["e_A"],
        eve_info_predicted=pred["eve_info"],
    )


def run(cfg: ProtocolConfig) -> tuple[Transcript, ProtocolReport]:
    tr = simulate(cfg)
    return tr, report(cfg, tr)


# ---------------------------------------------------------------------------
# Analytic key-rate table


def analytic_report(F_values, e_grid, p1: float = 0.5) -> dict:
    """Key rate on an (F, e) grid plus each F's zero crossing.

    F = 1 is the conventional curve; other F use the leak-assisted bound.
    """
    rows = []
    crossings = {}
    for F in F_values:
        scenario = infotheory.Scenario.CONVENTIONAL if F == 1 else infotheory.Scenario.SIDE_CHANNEL
        for e in e_grid:
            inp = infotheory.RateInputs(float(e), float(F), p1, scenario)
            a = infotheory.i_ab(inp.e)
            b = infotheory.i_ae(inp)
            rows.append((float(F), float(e), a, b, a - b))
        crossings[float(F)] = infotheory.solve_threshold(scenario, F, p1, xtol=1e-13)
    return {"rows": rows, "crossings": crossings}
