"""Entropies, mutual informations and secret-key rates (all in bits per symbol)."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect
from scipy.stats import entropy

MAX_ERROR = 0.75
MAX_INTERCEPT_ERROR = 3 / 8
BRACKET = (1e-9, MAX_INTERCEPT_ERROR - 1e-9)


class Scenario(str, enum.Enum):
    CONVENTIONAL = "conventional"
    SIDE_CHANNEL = "side_channel"


@dataclass(frozen=True)
class RateInputs:
    e: float
    F: float = 1.0
    p1: float = 0.5
    scenario: Scenario = Scenario.CONVENTIONAL

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if not 0 <= self.e <= MAX_ERROR:
            raise ValueError(f"e = {self.e} outside [0, 3/4]")
        if not 0.5 <= self.F <= 1:
            raise ValueError(f"F = {self.F} outside [1/2, 1]")
        if not 0 <= self.p1 <= 1:
            raise ValueError(f"p1 = {self.p1} outside [0, 1]")


@dataclass(frozen=True)
class RateReport:
    i_ab: float
    i_ae: float
    key_rate: float
    threshold_e: float = float("nan")


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise ValueError(f"not a probability vector: {p}")
    return float(entropy(p, base=2))


def _check_e(e, hi=MAX_ERROR):
    if not 0 <= e <= hi:
        raise ValueError(f"error rate {e} outside [0, {hi}]")


def i_ab(e: float) -> float:
    """Alice-Bob information for a symmetric error e over four symbols."""
    _check_e(e)
    return 2 - shannon_entropy([1 - e, e / 3, e / 3, e / 3])


def i_ae_conventional(e: float) -> float:
    """Eve's intercept-resend information, 8e/3 (attack fraction f = 8e/3 <= 1)."""
    _check_e(e, MAX_INTERCEPT_ERROR)
    return 8 * e / 3


def _leak_weight(F: float, p1: float) -> float:
    return 2 * (1 - F) * (1 - p1)


def i_ae_side(e: float, F: float, p1: float = 0.5) -> float:
    """Eve's information when she also reads the plate's radiative leak."""
    _check_e(e)
    w = _leak_weight(F, p1)
    if 1 - w <= 0:
        raise ValueError(f"1 - 2(1-F)(1-p1) = {1 - w} <= 0")
    return (8 * e / 3) * (1 + w) / (1 - w)


def i_ae_from_bell(e: float, B: float) -> float:
    """Upper bound on Eve's information given Alice's observed violation B."""
    _check_e(e)
    if B <= 0:
        raise ValueError(f"B = {B} must be positive")
    return (8 * e / 3) * (4 * np.sqrt(2) - B) / B


def i_ae(inputs: RateInputs) -> float:
    if inputs.scenario is Scenario.CONVENTIONAL:
        return i_ae_conventional(inputs.e)
    return i_ae_side(inputs.e, inputs.F, inputs.p1)


def key_rate(inputs: RateInputs) -> float:
    # I(A:E) = I(B:E) here, so the min is either one.
    return i_ab(inputs.e) - i_ae(inputs)


def rate_report(inputs: RateInputs) -> RateReport:
    a, b = i_ab(inputs.e), i_ae(inputs)
    return RateReport(a, b, a - b)


def solve_threshold(
    scenario: Scenario | str = Scenario.CONVENTIONAL,
    F: float = 1.0,
    p1: float = 0.5,
    xtol: float = 1e-6,
) -> float:
    """Largest tolerable channel error: the zero of the key rate on (0, 3/8)."""
    scenario = Scenario(scenario)

    def k(e):
        return key_rate(RateInputs(e, F, p1, scenario))

    lo, hi = BRACKET
    if not (k(lo) > 0 > k(hi)):
        raise ValueError(f"key rate has no sign change on {BRACKET} for F={F}, p1={p1}")
    return float(bisect(k, lo, hi, xtol=xtol))
