"""Closed-form error-rate theory and MC-vs-theory comparison statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import stats

from .engine import Receiver, RunConfig, homodyne_signal_photons, pc_pulse_pair
from .homodyne import ber_theory, gaussian_tail
from .optics import effective_visibility


@dataclass(frozen=True)
class TheoryPoint:
    """One predicted-vs-observed comparison row."""

    parameter_value: float
    predicted: float
    observed: float
    ci_low: float
    ci_high: float
    z_score: float

    def __post_init__(self):
        if not self.ci_low <= self.observed <= self.ci_high:
            raise ValueError(
                f"interval [{self.ci_low}, {self.ci_high}] must contain "
                f"observed={self.observed}"
            )


def qber_theory_pc(mu: float, eta: float, visibility: float, p_dark: float) -> float:
    """Matched-basis photon-counting QBER with double clicks discarded.

    The right/wrong output ports carry mu*(1+V)/2 and mu*(1-V)/2 mean
    photons; with per-gate click probabilities p_r and p_w the error rate,
    conditioned on exactly one click, is

        QBER = p_w*(1-p_r) / (p_w*(1-p_r) + p_r*(1-p_w))

    mirroring the simulator's discard of double clicks. Equals 0.5 when
    only dark counts click and tends to (1-V)/2 in the weak-flux limit.
    """
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must be in [0, 1], got {visibility}")
    if not 0.0 <= p_dark <= 1.0:
        raise ValueError(f"p_dark must be in [0, 1], got {p_dark}")
    survive_dark = 1.0 - p_dark
    p_right = 1.0 - survive_dark * math.exp(-eta * mu * (1.0 + visibility) / 2.0)
    p_wrong = 1.0 - survive_dark * math.exp(-eta * mu * (1.0 - visibility) / 2.0)
    wrong_only = p_wrong * (1.0 - p_right)
    right_only = p_right * (1.0 - p_wrong)
    if wrong_only + right_only == 0.0:
        return 0.0
    return wrong_only / (wrong_only + right_only)


def wilson_interval(errors: int, trials: int, confidence: float) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Preferred over the Wald interval because QBER estimates sit near 0,
    where Wald coverage collapses at realistic trial counts.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= errors <= trials:
        raise ValueError(f"errors must be in [0, trials], got {errors}/{trials}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    phat = errors / trials
    z2n = z * z / trials
    center = (phat + z2n / 2.0) / (1.0 + z2n)
    half = (
        z
        * math.sqrt(phat * (1.0 - phat) / trials + z2n / (4.0 * trials))
        / (1.0 + z2n)
    )
    # the score bounds hit the boundary exactly at degenerate counts
    low = 0.0 if errors == 0 else max(0.0, center - half)
    high = 1.0 if errors == trials else min(1.0, center + half)
    return low, high


def compare(predicted: float, errors: int, trials: int) -> float:
    """Binomial z-score of an observed error count against a prediction.

        z = (errors/trials - predicted) / sqrt(predicted*(1-predicted)/trials)

    |z| <= 3 is the pass contract used throughout the acceptance suite.
    A degenerate prediction (exactly 0 or 1) gives z = 0 when the
    observation agrees exactly and +-inf otherwise.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    observed = errors / trials
    if predicted in (0.0, 1.0):
        if observed == predicted:
            return 0.0
        return math.copysign(math.inf, observed - predicted)
    return (observed - predicted) / math.sqrt(predicted * (1.0 - predicted) / trials)


def predicted_qber(config: RunConfig) -> float:
    """Closed-form QBER for a config, assuming phase-noise-free operation.

    Matches the engine's receiver composition (photon budget split, mode
    visibility, threshold dead zone). Drift and modulator noise are not
    modeled here; predictions for configs with nonzero phase noise are
    optimistic.
    """
    if config.receiver is Receiver.PHOTON_COUNTING:
        pair = pc_pulse_pair(config)
        mu_bob = pair.signal_mean_photons + pair.ref_mean_photons
        if mu_bob > 0:
            vis = effective_visibility(
                config.visibility,
                pair.pol_angle,
                pair.signal_mean_photons,
                pair.ref_mean_photons,
            )
        else:
            vis = 0.0
        return qber_theory_pc(
            mu_bob,
            config.apd.quantum_efficiency,
            vis,
            config.apd.dark_prob_per_gate,
        )

    hp = config.homodyne
    n_eff = homodyne_signal_photons(config)
    threshold = hp.decision_threshold
    if threshold == 0.0:
        return ber_theory(n_eff, hp.quantum_efficiency, hp.electronic_noise_ratio)
    # Dead zone: condition the sign flip on the sample escaping it.
    mean = 2.0 * hp.quantum_efficiency * math.sqrt(hp.lo_mean_photons * n_eff)
    std = math.sqrt(
        hp.quantum_efficiency * hp.lo_mean_photons * (1.0 + hp.electronic_noise_ratio)
    )
    p_err = gaussian_tail((threshold + mean) / std)
    p_ok = gaussian_tail((threshold - mean) / std)
    return p_err / (p_err + p_ok)
