"""Deterministic end-to-end link runs and parameter sweeps.

A run is symbol-synchronous: one (basis, bit) frame per repetition period
with the key and reference pulse time-multiplexed 1:1 inside it, and no
intra-pulse time structure (the gate width only enters through the
per-gate dark probability). All randomness flows from RunConfig.seed
through four spawned sub-streams, consumed in a fixed layout:

    stream 0  Alice: bases, then bits
    stream 1  Bob: bases
    stream 2  optics: modulator phase noise, then drift increments
    stream 3  detector: click uniforms (photon counting) or
              quadrature normals (homodyne)

so toggling one noise source never perturbs the draws of another, and an
identical seed+config reproduces a run bit for bit.

Receiver composition:

* photon counting - the per-bit photon budget mu is split equally between
  the key and reference pulse, so the matched-basis port means are
  mu*(1 +- V*cos(delta))/2; clicks are drawn per gate and a non-paralyzable
  dead-time scan, keyed on accepted clicks, closes the gate after each one.
* homodyne - the full per-bit budget rides the signal pulse and beats
  against the strong reference; the composite mode visibility (intrinsic x
  polarization x extinction, no balance term since the reference is meant
  to dominate) scales the beat amplitude, i.e. the effective signal photon
  number is V^2 * mu. The balanced pair is wired port2 minus port1, so
  light exiting the delta=pi port (bit 1) drives the output positive and
  the sign decision recovers the bit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import ConfigError
from .homodyne import HomodyneParams, gaussian_tail
from .optics import (
    ChannelParams,
    PulsePair,
    VisibilityParams,
    apply_loss,
    effective_visibility,
    wrap_phase,
)
from .photon_counting import ApdParams, dead_time_gating, max_count_rate
from .protocol import AMBIGUOUS, NO_DETECTION, Basis, Bit, DetectionOutcome, detected

_HALF_PI = math.pi / 2

# Vectorized outcome codes: 0/1 decided bit, negatives are discards.
CODE_NO_DETECTION = -1
CODE_AMBIGUOUS = -2


class Receiver(Enum):
    PHOTON_COUNTING = "photon_counting"
    HOMODYNE = "homodyne"


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one simulated link run."""

    receiver: Receiver = Receiver.PHOTON_COUNTING
    n_symbols: int = 100_000
    mean_photons_per_bit: float = 0.1
    rep_rate_hz: float = 4e6
    seed: int = 1
    channel: ChannelParams = field(default_factory=ChannelParams)
    visibility: VisibilityParams = field(default_factory=VisibilityParams)
    apd: ApdParams = field(default_factory=ApdParams)
    homodyne: HomodyneParams = field(default_factory=HomodyneParams)

    def __post_init__(self):
        if not isinstance(self.receiver, Receiver):
            raise ConfigError(f"receiver must be a Receiver, got {self.receiver!r}")
        if self.n_symbols < 1:
            raise ConfigError(f"n_symbols must be >= 1, got {self.n_symbols}")
        if self.mean_photons_per_bit < 0:
            raise ConfigError(
                f"mean_photons_per_bit must be >= 0, "
                f"got {self.mean_photons_per_bit}"
            )
        if self.rep_rate_hz <= 0:
            raise ConfigError(f"rep_rate_hz must be > 0, got {self.rep_rate_hz}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class RunStats:
    """Aggregated counts and rates for one run.

    sent = sifted + discarded_basis + discarded_no_detection +
    discarded_ambiguous; qber is NaN when nothing was sifted.
    """

    sent: int
    detected: int
    sifted: int
    errors: int
    discarded_basis: int
    discarded_no_detection: int
    discarded_ambiguous: int
    qber: float
    raw_detection_rate_hz: float
    sifted_key_rate_hz: float

    FIELDS = (
        "sent",
        "detected",
        "sifted",
        "errors",
        "discarded_basis",
        "discarded_no_detection",
        "discarded_ambiguous",
        "qber",
        "raw_detection_rate_hz",
        "sifted_key_rate_hz",
    )

    def as_row(self) -> list:
        return [getattr(self, name) for name in self.FIELDS]


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """Per-symbol record, emitted only when tracing is enabled."""

    index: int
    alice_basis: Basis
    alice_bit: Bit
    bob_basis: Basis
    outcome: DetectionOutcome
    homodyne_sample: float | None = None

    @property
    def basis_match(self) -> bool:
        return self.alice_basis is self.bob_basis


def pc_pulse_pair(config: RunConfig) -> PulsePair:
    """Post-loss key+reference pair seen by the photon-counting coupler."""
    mu_bob = apply_loss(config.mean_photons_per_bit, config.channel.loss_db)
    return PulsePair(
        signal_mean_photons=0.5 * mu_bob,
        ref_mean_photons=0.5 * mu_bob,
        relative_phase=0.0,
        pol_angle=config.channel.pol_angle,
    )


def homodyne_mode_visibility(config: RunConfig) -> float:
    """Mode-overlap efficiency of the signal/reference beat.

    Intrinsic contrast, polarization overlap, and extinction leakage apply;
    the intensity-balance factor does not (the reference is supposed to be
    much stronger than the signal), so it is evaluated at equal unit
    intensities.
    """
    return effective_visibility(config.visibility, config.channel.pol_angle, 1.0, 1.0)


def homodyne_signal_photons(config: RunConfig) -> float:
    """Effective signal photon number at the balanced receiver, V^2 * mu."""
    mu_bob = apply_loss(config.mean_photons_per_bit, config.channel.loss_db)
    v = homodyne_mode_visibility(config)
    return v * v * mu_bob


def _photon_counting_codes(config: RunConfig, delta: np.ndarray, rng) -> np.ndarray:
    apd = config.apd
    pair = pc_pulse_pair(config)
    mu_s, mu_r = pair.signal_mean_photons, pair.ref_mean_photons
    half = 0.5 * (mu_s + mu_r)
    if mu_s + mu_r > 0:
        vis = effective_visibility(config.visibility, pair.pol_angle, mu_s, mu_r)
        beat = math.sqrt(mu_s * mu_r) * vis * np.cos(delta)
    else:
        beat = np.zeros_like(delta)
    m1 = np.maximum(0.0, half + beat)
    m2 = np.maximum(0.0, half - beat)

    eta = apd.quantum_efficiency
    survive_dark = 1.0 - apd.dark_prob_per_gate
    p1 = 1.0 - survive_dark * np.exp(-eta * m1)
    p2 = 1.0 - survive_dark * np.exp(-eta * m2)
    n = delta.size
    c1 = rng.random(n) < p1
    c2 = rng.random(n) < p2

    if apd.dead_time_us > 0:
        # Walk click candidates in time order; only accepted clicks restart
        # the dead time (clicks inside it are lost, not extending).
        last: int | None = None
        for idx in np.flatnonzero(c1 | c2):
            idx = int(idx)
            if dead_time_gating(last, idx, apd):
                last = idx
            else:
                c1[idx] = False
                c2[idx] = False

    codes = np.full(n, CODE_NO_DETECTION, dtype=np.int8)
    codes[c1 & ~c2] = 0
    codes[~c1 & c2] = 1
    codes[c1 & c2] = CODE_AMBIGUOUS
    return codes


def _homodyne_samples(config: RunConfig, delta: np.ndarray, rng) -> np.ndarray:
    hp = config.homodyne
    eta = hp.quantum_efficiency
    amp = 2.0 * eta * math.sqrt(hp.lo_mean_photons * homodyne_signal_photons(config))
    std = math.sqrt(eta * hp.lo_mean_photons * (1.0 + hp.electronic_noise_ratio))
    noise = std * rng.standard_normal(delta.size)
    # port2 minus port1 wiring: positive output means light in the delta=pi
    # port, i.e. bit 1.
    return noise - amp * np.cos(delta)


def _sign_codes(samples: np.ndarray, threshold: float) -> np.ndarray:
    if threshold == 0.0:
        # exact zero decides as one by convention
        return np.where(samples >= 0.0, 1, 0).astype(np.int8)
    codes = np.full(samples.size, CODE_NO_DETECTION, dtype=np.int8)
    codes[samples > threshold] = 1
    codes[samples < -threshold] = 0
    return codes


def _outcome_of(code: int) -> DetectionOutcome:
    if code == 0:
        return detected(Bit.ZERO)
    if code == 1:
        return detected(Bit.ONE)
    if code == CODE_AMBIGUOUS:
        return AMBIGUOUS
    return NO_DETECTION


def run(config: RunConfig, trace: bool = False, trace_limit: int | None = None):
    """Simulate one run; returns RunStats, or (RunStats, records) when tracing.

    trace_limit caps how many leading symbols get a TraceRecord (None means
    all); it never changes the simulated statistics.
    """
    n = config.n_symbols
    ss = np.random.SeedSequence(config.seed)
    rng_alice, rng_bob, rng_optics, rng_det = (
        np.random.default_rng(child) for child in ss.spawn(4)
    )

    alice_basis = rng_alice.integers(0, 2, n, dtype=np.int8)
    alice_bit = rng_alice.integers(0, 2, n, dtype=np.int8)
    bob_basis = rng_bob.integers(0, 2, n, dtype=np.int8)

    phase_a = alice_basis * _HALF_PI + alice_bit * math.pi
    phase_b = bob_basis * _HALF_PI

    ch = config.channel
    mod_noise = rng_optics.standard_normal(n) * ch.phase_mod_sigma
    drift = np.cumsum(rng_optics.standard_normal(n)) * ch.drift_sigma
    delta = wrap_phase(phase_a + mod_noise + drift) - phase_b

    samples = None
    if config.receiver is Receiver.PHOTON_COUNTING:
        codes = _photon_counting_codes(config, delta, rng_det)
    else:
        samples = _homodyne_samples(config, delta, rng_det)
        codes = _sign_codes(samples, config.homodyne.decision_threshold)

    matched = alice_basis == bob_basis
    is_bit = codes >= 0
    kept = matched & is_bit
    n_detected = int(is_bit.sum())
    n_sifted = int(kept.sum())
    n_errors = int((kept & (codes != alice_bit)).sum())
    stats = RunStats(
        sent=n,
        detected=n_detected,
        sifted=n_sifted,
        errors=n_errors,
        discarded_basis=int((~matched).sum()),
        discarded_no_detection=int((matched & (codes == CODE_NO_DETECTION)).sum()),
        discarded_ambiguous=int((matched & (codes == CODE_AMBIGUOUS)).sum()),
        qber=n_errors / n_sifted if n_sifted > 0 else math.nan,
        raw_detection_rate_hz=n_detected / n * config.rep_rate_hz,
        sifted_key_rate_hz=n_sifted / n * config.rep_rate_hz,
    )
    if not trace:
        return stats

    limit = n if trace_limit is None else min(trace_limit, n)
    records = [
        TraceRecord(
            index=i,
            alice_basis=Basis(int(alice_basis[i])),
            alice_bit=Bit(int(alice_bit[i])),
            bob_basis=Basis(int(bob_basis[i])),
            outcome=_outcome_of(int(codes[i])),
            homodyne_sample=float(samples[i]) if samples is not None else None,
        )
        for i in range(limit)
    ]
    return stats, records


# Numeric RunConfig fields one run may be swept over. afterpulse_prob is
# reserved and receiver is categorical, so neither appears.
SWEEPABLE_PARAMETERS = (
    "n_symbols",
    "mean_photons_per_bit",
    "rep_rate_hz",
    "seed",
    "channel.loss_db",
    "channel.drift_sigma",
    "channel.pol_angle",
    "channel.phase_mod_sigma",
    "visibility.intrinsic_visibility",
    "visibility.extinction_ratio_db",
    "apd.quantum_efficiency",
    "apd.dark_prob_per_gate",
    "apd.gate_width_ns",
    "apd.dead_time_us",
    "apd.rep_rate_hz",
    "homodyne.lo_mean_photons",
    "homodyne.quantum_efficiency",
    "homodyne.electronic_noise_ratio",
    "homodyne.cmrr_db",
    "homodyne.decision_threshold",
)

_INT_PARAMETERS = {"n_symbols", "seed"}


def set_parameter(config: RunConfig, name: str, value) -> RunConfig:
    """New config with one (possibly nested) numeric field replaced."""
    if name not in SWEEPABLE_PARAMETERS:
        raise ConfigError(
            f"unknown parameter '{name}'; sweepable parameters: "
            + ", ".join(SWEEPABLE_PARAMETERS)
        )
    if name in _INT_PARAMETERS:
        if value != int(value):
            raise ConfigError(f"{name} must be an integer, got {value}")
        value = int(value)
    else:
        value = float(value)
    head, _, tail = name.partition(".")
    try:
        if tail:
            return replace(config, **{head: replace(getattr(config, head), **{tail: value})})
        return replace(config, **{head: value})
    except ValueError as err:
        raise ConfigError(f"{name}: {err}") from err


def derive_subseed(seed: int, index: int) -> int:
    """Stable 64-bit sub-seed for row `index` of a sweep over `seed`."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def sweep(
    base: RunConfig, parameter: str, values, max_workers: int = 1
) -> list[tuple[float, RunStats]]:
    """One independent run per value, rows in input order.

    Each row runs under a sub-seed derived from (base.seed, row index) so
    rows are statistically independent; sweeping "seed" itself uses the
    given values verbatim instead.
    """
    values = list(values)
    if not values:
        raise ConfigError("sweep values list is empty")
    configs = []
    for i, value in enumerate(values):
        cfg = set_parameter(base, parameter, value)
        if parameter != "seed":
            cfg = replace(cfg, seed=derive_subseed(base.seed, i))
        configs.append(cfg)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            stats = list(pool.map(run, configs))
    else:
        stats = [run(cfg) for cfg in configs]
    return list(zip(values, stats))


def sweep_workers_from_env() -> int:
    """Parallelism cap from QKDSIM_THREADS; unset means sequential."""
    raw = os.environ.get("QKDSIM_THREADS")
    if raw is None:
        return 1
    try:
        workers = int(raw)
    except ValueError as err:
        raise ConfigError(f"QKDSIM_THREADS must be an integer, got {raw!r}") from err
    if workers < 1:
        raise ConfigError(f"QKDSIM_THREADS must be >= 1, got {workers}")
    return workers


def _decide_prob(mean: float, std: float, threshold: float) -> float:
    """P(|sample| > threshold) for a N(mean, std^2) quadrature sample."""
    if threshold == 0.0:
        return 1.0
    return gaussian_tail((threshold - mean) / std) + gaussian_tail(
        (threshold + mean) / std
    )


def expected_rates(config: RunConfig) -> tuple[float, float]:
    """Analytic (raw_hz, sifted_hz) expectation for a config.

    Photon counting: the exactly-one-click probability, averaged over the
    four equiprobable phase differences, feeds the non-paralyzable
    saturation formula (gate closures from double clicks are O(p^2) and
    neglected; exact when the dead time is 0). Homodyne: repetition rate
    times the decide probability. Sifting halves either rate. Assumes
    phase-noise-free operation.
    """
    deltas = (0.0, _HALF_PI, math.pi, 3 * _HALF_PI)
    if config.receiver is Receiver.PHOTON_COUNTING:
        apd = config.apd
        pair = pc_pulse_pair(config)
        mu_s, mu_r = pair.signal_mean_photons, pair.ref_mean_photons
        half = 0.5 * (mu_s + mu_r)
        vis = (
            effective_visibility(config.visibility, pair.pol_angle, mu_s, mu_r)
            if mu_s + mu_r > 0
            else 0.0
        )
        survive_dark = 1.0 - apd.dark_prob_per_gate
        p_one = 0.0
        for d in deltas:
            beat = math.sqrt(mu_s * mu_r) * vis * math.cos(d)
            p1 = 1.0 - survive_dark * math.exp(-apd.quantum_efficiency * (half + beat))
            p2 = 1.0 - survive_dark * math.exp(-apd.quantum_efficiency * (half - beat))
            p_one += p1 * (1.0 - p2) + p2 * (1.0 - p1)
        p_one /= len(deltas)
        raw = max_count_rate(apd, p_one)
    else:
        hp = config.homodyne
        eta = hp.quantum_efficiency
        amp = 2.0 * eta * math.sqrt(hp.lo_mean_photons * homodyne_signal_photons(config))
        std = math.sqrt(eta * hp.lo_mean_photons * (1.0 + hp.electronic_noise_ratio))
        p_decide = sum(
            _decide_prob(amp * math.cos(d), std, hp.decision_threshold) for d in deltas
        ) / len(deltas)
        raw = config.rep_rate_hz * p_decide
    return raw, raw / 2.0
