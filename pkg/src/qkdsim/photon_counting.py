"""Gated APD click statistics: Poisson detection, dark counts, dead time.

An APD biased above breakdown only inside short gates sees a coherent pulse
of mean photon number m as a Poisson photoelectron process with rate
eta * m, on top of a per-gate dark-count probability. After any avalanche
the diode must be quenched and recharged; during that dead time the gate
stays closed, which caps the sustainable count rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ApdParams:
    """Gated avalanche photodiode parameters.

    The dark probability and dead time defaults are representative of
    cooled InGaAs devices, not measured values; both are plain config
    knobs. afterpulse_prob is reserved for a future correlated-noise
    model and must stay 0 for now.
    """

    quantum_efficiency: float = 0.1
    dark_prob_per_gate: float = 1e-4
    gate_width_ns: float = 2.5
    dead_time_us: float = 10.0
    rep_rate_hz: float = 4e6
    afterpulse_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.quantum_efficiency <= 1.0:
            raise ValueError(
                f"quantum_efficiency must be in [0, 1], "
                f"got {self.quantum_efficiency}"
            )
        if not 0.0 <= self.dark_prob_per_gate <= 1.0:
            raise ValueError(
                f"dark_prob_per_gate must be in [0, 1], "
                f"got {self.dark_prob_per_gate}"
            )
        if self.gate_width_ns <= 0:
            raise ValueError(f"gate_width_ns must be > 0, got {self.gate_width_ns}")
        if self.dead_time_us < 0:
            raise ValueError(f"dead_time_us must be >= 0, got {self.dead_time_us}")
        if self.rep_rate_hz <= 0:
            raise ValueError(f"rep_rate_hz must be > 0, got {self.rep_rate_hz}")
        if self.afterpulse_prob != 0.0:
            raise ValueError(
                f"afterpulse_prob is reserved and must be 0, "
                f"got {self.afterpulse_prob}"
            )

    @property
    def dead_time_s(self) -> float:
        return self.dead_time_us * 1e-6


def click_prob(mean_photons_at_port: float, apd: ApdParams) -> float:
    """Per-gate click probability: 1 - (1 - p_dark) * exp(-eta * m).

    The optical term is the Poisson probability of at least one
    photoelectron; dark and optical events are independent.
    """
    if mean_photons_at_port < 0:
        raise ValueError(
            f"mean_photons_at_port must be >= 0, got {mean_photons_at_port}"
        )
    return 1.0 - (1.0 - apd.dark_prob_per_gate) * math.exp(
        -apd.quantum_efficiency * mean_photons_at_port
    )


def sample_clicks(
    m1: float, m2: float, apd: ApdParams, gate_open: bool, rng
) -> tuple[bool, bool]:
    """Draw one gated click pair. A closed gate clicks on nothing."""
    if not gate_open:
        return False, False
    c1 = rng.random() < click_prob(m1, apd)
    c2 = rng.random() < click_prob(m2, apd)
    return c1, c2


def dead_time_gating(
    last_click_symbol: int | None, current_symbol: int, apd: ApdParams
) -> bool:
    """True when the gate is open at current_symbol.

    Closed iff a prior click exists and less than the dead time has
    elapsed since it, at one symbol per repetition period. Non-paralyzable:
    the caller must only record accepted clicks into last_click_symbol.
    """
    if last_click_symbol is None:
        return True
    if current_symbol < last_click_symbol:
        raise ValueError(
            f"current_symbol {current_symbol} precedes last click "
            f"{last_click_symbol}"
        )
    elapsed_s = (current_symbol - last_click_symbol) / apd.rep_rate_hz
    return elapsed_s >= apd.dead_time_s


def max_count_rate(apd: ApdParams, p_click: float) -> float:
    """Saturated count rate under non-paralyzable dead time, in counts/s.

        R = rep * p / (1 + rep * p * tau)

    which tends to rep * p when rep * p * tau << 1 and is bounded above by
    1 / tau; the quenching process is what keeps gated counting slow.
    """
    if not 0.0 <= p_click <= 1.0:
        raise ValueError(f"p_click must be in [0, 1], got {p_click}")
    incident = apd.rep_rate_hz * p_click
    return incident / (1.0 + incident * apd.dead_time_s)
