"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records a one-line verdict; ``conftest.py`` prints them at the end
of the session.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import itertools
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from intraqkd import bell, infotheory
from intraqkd.attacks import (
    PI0,
    InterceptResendConfig,
    SideChannelConfig,
    disturbed_basis,
    particle_of,
    pristine_particle,
    qwp_attack_prepare,
)
from intraqkd.optics import BasisLabel, mub_overlap_table, prepare_basis, reverse_circuit
from intraqkd.protocol import ProtocolConfig, run
from intraqkd.qstate import (
    JOINT_DIMS,
    StateVector,
    fidelity_to,
    is_entangled_ppt,
    is_unitary,
    partial_trace,
    werner,
)

VERDICTS: list = []


def record(number: int, ok: bool, detail: str):
    VERDICTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}")
    assert ok, detail


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_01_conventional_threshold():
    e2, dt = timed(lambda: infotheory.solve_threshold("conventional"))
    record(1, 0.26 <= e2 <= 0.28 and dt < 1, f"e2 = {e2:.6f} in [0.26, 0.28], {dt:.3f} s")


def test_criterion_02_side_channel_threshold():
    e, dt = timed(lambda: infotheory.solve_threshold("side_channel", 0.5, 0.5))
    record(2, 0.140 <= e <= 0.150 and dt < 1, f"e(F=1/2, p1=1/2) = {e:.6f} in [0.140, 0.150], {dt:.3f} s")


def test_criterion_03_nonlocality_and_entanglement_thresholds():
    phi = prepare_basis("G2")[0]

    def check():
        e_lr = bell.threshold_e_LR()
        lr_ok = abs(e_lr - 0.75 * (1 - 1 / math.sqrt(2))) < 1e-9
        flip_ok = is_entangled_ppt(werner(0.5 - 1e-6, phi)) and not is_entangled_ppt(werner(0.5 + 1e-6, phi))
        return e_lr, lr_ok and flip_ok and bell.threshold_e_ent() == 0.5

    (e_lr, ok), dt = timed(check)
    record(3, ok and dt < 1, f"e_LR = {e_lr:.9f}, PPT flip at 0.5 +- 1e-6, {dt:.3f} s")


def test_criterion_04_werner_linearity():
    grid = np.round(np.arange(0, 0.7001, 0.05), 10)

    def worst():
        return max(abs(bell.werner_s(e) - (1 - 4 * e / 3) * 2 * math.sqrt(2)) for e in grid)

    err, dt = timed(worst)
    record(4, err < 1e-6 and dt < 1, f"max |S_opt - (1-4e/3) 2sqrt2| = {err:.2e} on {len(grid)} points, {dt:.3f} s")


def test_criterion_05_separable_bound():
    s, dt = timed(lambda: bell.separable_bound_search(100_000, bell.CORRECTED_SETTINGS, seed=0))
    ok = math.sqrt(2) - 0.01 <= s <= math.sqrt(2) + 1e-6 and dt < 30
    record(5, ok, f"max |S| over 1e5 product states = {s:.9f}, {dt:.2f} s")


GRID = list(itertools.product([0.5, 1.0], [0.0, np.pi / 4, np.pi / 2]))


def _grid_cfg(f, theta):
    return ProtocolConfig(
        n=100_000,
        g=0.2,
        p1=0.5,
        attack=InterceptResendConfig(f),
        side_channel=SideChannelConfig(theta),
        seed=2024,
    )


@pytest.fixture(scope="module")
def grid_runs():
    t0 = time.perf_counter()
    reports = {}
    for key in GRID:
        tr, rep = run(_grid_cfg(*key))
        n_g2 = int(np.sum(tr.verified & (tr.alice_basis == 1)))  # verified G2 preparations
        reports[key] = (rep, n_g2)
    return reports, time.perf_counter() - t0


def _within(obs, p, n, k=3.0):
    sigma = math.sqrt(p * (1 - p) / n) if 0 < p < 1 else 0.0
    return abs(obs - p) <= k * sigma + 1e-15


def test_criterion_06_monte_carlo_vs_closed_form(grid_runs):
    reports, dt = grid_runs
    ok, parts = dt < 60, []
    for (f, theta), (rep, n_g2) in reports.items():
        s2 = math.sin(theta) ** 2
        e_pred = 3 * f / 8 * (1 - 0.5 * s2)
        ea_pred = 0.5 * s2
        good = _within(rep.e_observed, e_pred, rep.disclosed_length) and _within(
            rep.e_A_conditioned, ea_pred, n_g2
        )
        ok &= good
        parts.append(f"(f={f},th={theta:.3f}) e={rep.e_observed:.4f}/{e_pred:.4f} eA={rep.e_A_conditioned:.4f}/{ea_pred:.4f}")
    record(6, ok, f"{'; '.join(parts)}; total {dt:.2f} s")


def test_criterion_07_eve_information(grid_runs):
    reports, _ = grid_runs
    ok, parts = True, []
    for (f, theta), (rep, _) in reports.items():
        pred = f * (1 + 0.5 * math.sin(theta) ** 2)  # conventional value f when theta = 0
        q = pred / 2  # known-bit tallies are 0 or 2
        sigma = 2 * math.sqrt(q * (1 - q) / rep.sifted_length)
        good = abs(rep.eve_info_observed - pred) <= 3 * sigma
        ok &= good
        parts.append(f"(f={f},th={theta:.3f}) {rep.eve_info_observed:.4f}/{pred:.4f}")
    record(7, ok, "; ".join(parts))


def test_criterion_08_structural_suite():
    failures = []
    labels = list(BasisLabel)
    for label in labels:
        b = prepare_basis(label)
        m = b.matrix()
        if not np.allclose(m.conj().T @ m, np.eye(4), atol=1e-12):
            failures.append(f"gram {label.value}")
        for c, s in zip(b.circuits, b.states):
            if not all(is_unitary(el.unitary()) for el in c.elements) or not is_unitary(c.unitary()):
                failures.append(f"unitarity {label.value}")
            if not is_unitary(c.joint_unitary(0.9), tol=1e-12):
                failures.append(f"joint unitarity {label.value}")
            if not reverse_circuit(c).apply(s).allclose(b.source, atol=1e-12):
                failures.append(f"reversal {label.value}")
        if label is not BasisLabel.G1:
            if not np.allclose(mub_overlap_table(prepare_basis("G1"), b), 0.25, atol=1e-12):
                failures.append(f"MUB G1-{label.value}")
    rng = np.random.default_rng(0)
    for _ in range(20):
        v = rng.normal(size=16) + 1j * rng.normal(size=16)
        sv = StateVector(v / np.linalg.norm(v), JOINT_DIMS)
        for keep in ([0, 1], [2, 3], [1]):
            if abs(np.trace(partial_trace(sv, keep).matrix) - 1) > 1e-12:
                failures.append("trace preservation")
    worst_orth = worst_restore = 0.0
    for theta in (0.4, np.pi / 4, np.pi / 2):
        sc = SideChannelConfig(theta)
        d = disturbed_basis("G2", sc)
        gram = np.array([[np.vdot(a.amplitudes, c.amplitudes) for c in d] for a in d])
        worst_orth = max(worst_orth, np.abs(gram - np.eye(4)).max())
        for k in range(4):
            joint = qwp_attack_prepare(k, "G2", sc)
            if theta < np.pi / 2:
                post = StateVector(PI0 @ joint.amplitudes, JOINT_DIMS).normalize()
                worst_restore = max(worst_restore, abs(1 - fidelity_to(particle_of(post), prepare_basis("G2")[k])))
                worst_restore = max(worst_restore, abs(1 - fidelity_to(pristine_particle(post), prepare_basis("G2")[k])))
    if worst_orth > 1e-12:
        failures.append(f"disturbed-basis orthogonality {worst_orth:.1e}")
    if worst_restore > 1e-12:
        failures.append(f"PI0 coherence restoration {worst_restore:.1e}")
    record(
        8,
        not failures,
        f"bases/circuits/MUB/trace ok={not failures}; disturbed-basis dev {worst_orth:.1e}; "
        f"PI0 restoration dev {worst_restore:.1e}" + (f"; failures: {failures}" if failures else ""),
    )


def test_criterion_09_identity_bridge():
    Fs = np.linspace(0.5, 1, 101)
    es = np.linspace(0, 0.375, 16)
    worst = max(
        abs(infotheory.i_ae_from_bell(e, 2 * math.sqrt(2) * F) - infotheory.i_ae_side(e, F, 0.5))
        for F in Fs
        for e in es
    )
    lines, consistent = [], True
    for theta in (0.0, np.pi / 4, np.pi / 2):
        rho = particle_of(qwp_attack_prepare(0, "G2", SideChannelConfig(theta)))
        b = bell.chsh_optimal(rho)[0]
        consistent &= abs(b - bell.chsh_search(rho, restarts=10)) < 1e-6
        p, h = bell.bell_b_printed(theta), bell.bell_b_fidelity(theta)
        match = "printed" if abs(b - p) < 1e-6 else ("sqrt2(1+cos^2)" if abs(b - h) < 1e-6 else "neither")
        lines.append(f"th={theta:.3f}: B={b:.6f} vs 2sqrt2(1+c^2)={p:.6f}, sqrt2(1+c^2)={h:.6f} -> {match}")
    record(9, worst < 1e-12 and consistent, f"bridge max dev {worst:.1e}; " + "; ".join(lines))


COMMANDS = [
    ["thresholds"],
    ["sweep", "--steps", "301"],
    ["simulate", "--photons", "100000", "--f", "0.5", "--theta-sc", "0.7853981633974483", "--g", "0.2", "--seed", "11"],
    ["simulate", "--photons", "50000", "--f", "0.5", "--seed", "11", "--workers", "2"],
    ["bell", "--state", "werner", "--e", "0.1"],
]


def test_criterion_10_determinism():
    same = []
    for argv in COMMANDS:
        outs = [
            subprocess.run([sys.executable, "-m", "intraqkd", *argv], capture_output=True, check=False).stdout
            for _ in range(2)
        ]
        same.append(outs[0] == outs[1] and len(outs[0]) > 0)
    record(10, all(same), f"{sum(same)}/{len(same)} commands byte-identical across two runs")
