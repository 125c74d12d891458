"""Coherent pulse-pair propagation and interferometer output intensities.

Models the four optical impairments that generate false counts on this
kind of link: finite extinction of the reference pulses, polarization
misalignment between key and reference pulse, modulator phase deviation,
and slow thermo-mechanical phase drift of the fiber interferometer. All
of them are folded into either a composite fringe visibility or a phase
perturbation; the interferometer itself is the standard two-port coupler

    m1 = (mu_s + mu_r)/2 + sqrt(mu_s * mu_r) * V * cos(delta)
    m2 = (mu_s + mu_r)/2 - sqrt(mu_s * mu_r) * V * cos(delta)

which conserves energy (m1 + m2 = mu_s + mu_r) for every delta and V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PulsePair:
    """Optical state of one signal+reference pulse pair at a given point."""

    signal_mean_photons: float
    ref_mean_photons: float
    relative_phase: float = 0.0
    pol_angle: float = 0.0

    def __post_init__(self):
        if self.signal_mean_photons < 0:
            raise ValueError(
                f"signal_mean_photons must be >= 0, got {self.signal_mean_photons}"
            )
        if self.ref_mean_photons < 0:
            raise ValueError(
                f"ref_mean_photons must be >= 0, got {self.ref_mean_photons}"
            )
        if not 0.0 <= self.pol_angle <= math.pi / 2:
            raise ValueError(f"pol_angle must be in [0, pi/2], got {self.pol_angle}")


@dataclass(frozen=True)
class ChannelParams:
    """Link attenuation plus the stochastic phase/polarization impairments.

    drift_sigma is the per-symbol standard deviation of the interferometer
    phase random walk; phase_mod_sigma the per-symbol modulator deviation.
    """

    loss_db: float = 0.0
    drift_sigma: float = 0.0
    pol_angle: float = 0.0
    phase_mod_sigma: float = 0.0

    def __post_init__(self):
        if self.loss_db < 0:
            raise ValueError(f"loss_db must be >= 0, got {self.loss_db}")
        if self.drift_sigma < 0:
            raise ValueError(f"drift_sigma must be >= 0, got {self.drift_sigma}")
        if not 0.0 <= self.pol_angle <= math.pi / 2:
            raise ValueError(f"pol_angle must be in [0, pi/2], got {self.pol_angle}")
        if self.phase_mod_sigma < 0:
            raise ValueError(
                f"phase_mod_sigma must be >= 0, got {self.phase_mod_sigma}"
            )


@dataclass(frozen=True)
class DriftState:
    """Accumulated interferometer phase offset (radians)."""

    phase_offset: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.phase_offset):
            raise ValueError(f"phase_offset must be finite, got {self.phase_offset}")


@dataclass(frozen=True)
class VisibilityParams:
    """Intrinsic fringe contrast and reference-pulse extinction ratio."""

    intrinsic_visibility: float = 1.0
    extinction_ratio_db: float = math.inf

    def __post_init__(self):
        if not 0.0 <= self.intrinsic_visibility <= 1.0:
            raise ValueError(
                f"intrinsic_visibility must be in [0, 1], "
                f"got {self.intrinsic_visibility}"
            )
        if self.extinction_ratio_db < 0:
            raise ValueError(
                f"extinction_ratio_db must be >= 0, got {self.extinction_ratio_db}"
            )


def apply_loss(mean_photons: float, loss_db: float) -> float:
    """Attenuate a mean photon number by loss_db decibels."""
    if mean_photons < 0:
        raise ValueError(f"mean_photons must be >= 0, got {mean_photons}")
    if loss_db < 0:
        raise ValueError(f"loss_db must be >= 0, got {loss_db}")
    return mean_photons * 10.0 ** (-loss_db / 10.0)


def advance_drift(state: DriftState, drift_sigma: float, rng) -> DriftState:
    """One Wiener step of the interferometer drift.

    The increment is Normal(0, drift_sigma^2), so over k steps the total
    increment variance is k * drift_sigma^2.
    """
    if drift_sigma < 0:
        raise ValueError(f"drift_sigma must be >= 0, got {drift_sigma}")
    if drift_sigma == 0.0:
        return state
    return DriftState(state.phase_offset + drift_sigma * rng.standard_normal())


def effective_visibility(
    vp: VisibilityParams, pol_angle: float, mu_s: float, mu_r: float
) -> float:
    """Composite fringe visibility of the pulse-pair interference.

    Product of independent first-order degradation factors:

        V = V0 * |cos(pol_angle)|                    polarization overlap
              * 2*sqrt(mu_s*mu_r) / (mu_s + mu_r)    intensity balance
              * (1 - 10^(-ER_dB/10))                 extinction leakage

    clamped to [0, 1]. Maximal at equal intensities and aligned
    polarization. The extinction term treats leaked light as a fringe
    contrast penalty rather than a stray background (approximate but
    monotone in ER).
    """
    if mu_s < 0 or mu_r < 0:
        raise ValueError(f"mean photon numbers must be >= 0, got {mu_s}, {mu_r}")
    total = mu_s + mu_r
    if total == 0:
        raise ValueError("mu_s + mu_r must be positive")
    balance = 2.0 * math.sqrt(mu_s * mu_r) / total
    leakage = 1.0 - 10.0 ** (-vp.extinction_ratio_db / 10.0)
    v = vp.intrinsic_visibility * abs(math.cos(pol_angle)) * balance * leakage
    return min(1.0, max(0.0, v))


def port_means(mu_s: float, mu_r: float, delta_phi: float, visibility: float):
    """Mean photon numbers at the two interferometer output ports.

    Port 1 is constructive at delta_phi = 0, port 2 at delta_phi = pi.
    Outputs are clamped at 0 against rounding (Cauchy-Schwarz guarantees
    nonnegativity analytically) and sum to mu_s + mu_r.
    """
    if mu_s < 0 or mu_r < 0:
        raise ValueError(f"mean photon numbers must be >= 0, got {mu_s}, {mu_r}")
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must be in [0, 1], got {visibility}")
    half = 0.5 * (mu_s + mu_r)
    beat = math.sqrt(mu_s * mu_r) * visibility * math.cos(delta_phi)
    return max(0.0, half + beat), max(0.0, half - beat)


def perturb_phase(
    nominal: float, phase_mod_sigma: float, drift: DriftState, rng
) -> float:
    """Nominal phase plus modulator noise plus accumulated drift, in [0, 2pi)."""
    if phase_mod_sigma < 0:
        raise ValueError(f"phase_mod_sigma must be >= 0, got {phase_mod_sigma}")
    noise = phase_mod_sigma * rng.standard_normal() if phase_mod_sigma > 0 else 0.0
    return (nominal + noise + drift.phase_offset) % _TWO_PI


def wrap_phase(phi):
    """Wrap radians to [0, 2pi); works on scalars and arrays."""
    return np.mod(phi, _TWO_PI)
