"""Monte Carlo simulator of a BB84/QPSK fiber QKD link.

Two pluggable receiver models: gated-APD photon counting and balanced
super-homodyne detection against a strong interleaved reference. Runs are
fully seeded and every sampled statistic has a closed-form oracle in
:mod:`qkdsim.analysis`.
"""

from .analysis import TheoryPoint, compare, predicted_qber, qber_theory_pc, wilson_interval
from .engine import (
    Receiver,
    RunConfig,
    RunStats,
    TraceRecord,
    expected_rates,
    run,
    sweep,
)
from .errors import ConfigError
from .homodyne import (
    HomodyneParams,
    NoiseBudget,
    apply_common_mode,
    ber_theory,
    decide_sign,
    noise_budget,
    quadrature_sample,
)
from .optics import (
    ChannelParams,
    DriftState,
    PulsePair,
    VisibilityParams,
    advance_drift,
    apply_loss,
    effective_visibility,
    perturb_phase,
    port_means,
)
from .photon_counting import ApdParams, click_prob, dead_time_gating, max_count_rate, sample_clicks
from .protocol import (
    Basis,
    Bit,
    BobSetting,
    DetectionOutcome,
    SiftResult,
    SymbolFrame,
    Verdict,
    bob_phase,
    decide_from_clicks,
    encode_phase,
    sift,
)

__version__ = "0.1.0"

__all__ = [
    "ApdParams",
    "Basis",
    "Bit",
    "BobSetting",
    "ChannelParams",
    "ConfigError",
    "DetectionOutcome",
    "DriftState",
    "HomodyneParams",
    "NoiseBudget",
    "PulsePair",
    "Receiver",
    "RunConfig",
    "RunStats",
    "SiftResult",
    "SymbolFrame",
    "TheoryPoint",
    "TraceRecord",
    "Verdict",
    "VisibilityParams",
    "advance_drift",
    "apply_common_mode",
    "apply_loss",
    "ber_theory",
    "bob_phase",
    "click_prob",
    "compare",
    "dead_time_gating",
    "decide_from_clicks",
    "decide_sign",
    "effective_visibility",
    "encode_phase",
    "expected_rates",
    "max_count_rate",
    "noise_budget",
    "perturb_phase",
    "port_means",
    "predicted_qber",
    "qber_theory_pc",
    "quadrature_sample",
    "run",
    "sample_clicks",
    "sift",
    "sweep",
    "wilson_interval",
]
