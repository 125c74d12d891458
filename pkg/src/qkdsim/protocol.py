"""BB84 protocol layer: QPSK phase encoding, click decisions, and sifting.

Alice encodes one key bit per symbol as one of four phases {0, pi/2, pi,
3pi/2}: the basis selects an offset (B1 -> 0, B2 -> pi/2) and the bit adds
pi. Bob modulates his interferometer arm with the offset of his own basis
choice, so the interferometer sees the phase difference

    delta = phase_a - phase_b

which is 0 or pi when the bases match (carrying the bit) and +-pi/2 when
they do not (carrying nothing). Detector 1 sits on the constructive port
for delta = 0 and maps to bit 0; detector 2 (delta = pi) maps to bit 1.
Basis-mismatched symbols are discarded during sifting (anti-coincidence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConfigError


class Basis(Enum):
    """Encoding basis; B1 modulates phase offset 0, B2 offset pi/2."""

    B1 = 0
    B2 = 1


class Bit(Enum):
    ZERO = 0
    ONE = 1


class Verdict(Enum):
    """Receiver-level classification of one symbol."""

    BIT = "bit"
    NO_DETECTION = "no_detection"
    AMBIGUOUS = "ambiguous"


@dataclass(frozen=True, slots=True)
class DetectionOutcome:
    """Per-symbol receiver verdict: a decided bit, nothing, or a double click."""

    verdict: Verdict
    bit: Bit | None = None

    def __post_init__(self):
        if (self.verdict is Verdict.BIT) != (self.bit is not None):
            raise ValueError("bit must be set exactly when verdict is BIT")

    @property
    def is_bit(self) -> bool:
        return self.verdict is Verdict.BIT


NO_DETECTION = DetectionOutcome(Verdict.NO_DETECTION)
AMBIGUOUS = DetectionOutcome(Verdict.AMBIGUOUS)


def detected(bit: Bit) -> DetectionOutcome:
    """Outcome for a successfully decided bit."""
    return DetectionOutcome(Verdict.BIT, bit)


@dataclass(frozen=True, slots=True)
class SymbolFrame:
    """One transmitted symbol: Alice's basis, bit, and encoded phase."""

    index: int
    basis: Basis
    bit: Bit
    phase_a: float

    def __post_init__(self):
        expected = encode_phase(self.basis, self.bit)
        if not math.isclose(self.phase_a, expected, abs_tol=1e-12):
            raise ValueError(
                f"phase_a={self.phase_a} inconsistent with ({self.basis}, {self.bit})"
            )


@dataclass(frozen=True, slots=True)
class BobSetting:
    """Bob's per-symbol measurement choice."""

    basis: Basis
    phase_b: float = field(default=float("nan"))

    def __post_init__(self):
        if math.isnan(self.phase_b):
            object.__setattr__(self, "phase_b", bob_phase(self.basis))
        elif not math.isclose(self.phase_b, bob_phase(self.basis), abs_tol=1e-12):
            raise ValueError(f"phase_b={self.phase_b} inconsistent with {self.basis}")


@dataclass
class SiftResult:
    """Outcome of sifting: kept (index, alice_bit, bob_bit) plus discard tallies.

    Every input symbol lands in exactly one bucket. Basis comparison happens
    first (over the classical channel), so a basis-mismatched symbol counts
    as anti-coincidence regardless of what the receiver saw.
    """

    kept: list[tuple[int, Bit, Bit]]
    discarded_basis_mismatch: int
    discarded_no_detection: int
    discarded_ambiguous: int

    @property
    def total(self) -> int:
        return (
            len(self.kept)
            + self.discarded_basis_mismatch
            + self.discarded_no_detection
            + self.discarded_ambiguous
        )

    @property
    def errors(self) -> int:
        return sum(1 for _, a, b in self.kept if a is not b)


_BASIS_OFFSET = {Basis.B1: 0.0, Basis.B2: math.pi / 2}


def basis_offset(basis: Basis) -> float:
    """Phase offset selected by a basis: B1 -> 0, B2 -> pi/2."""
    return _BASIS_OFFSET[basis]


def encode_phase(basis: Basis, bit: Bit) -> float:
    """Alice's QPSK phase for (basis, bit): offset(basis) + pi * bit.

    Injective over the four combinations; result in {0, pi/2, pi, 3pi/2}.
    """
    return basis_offset(basis) + math.pi * bit.value


def bob_phase(basis: Basis) -> float:
    """Bob's modulator phase for his basis choice (the bit=0 corner)."""
    return basis_offset(basis)


def decide_from_clicks(click1: bool, click2: bool) -> DetectionOutcome:
    """Map a gated click pair to a verdict.

    Detector 1 is the delta=0 port (bit 0), detector 2 the delta=pi port
    (bit 1). Zero clicks give NO_DETECTION; simultaneous clicks carry no
    usable bit and are flagged AMBIGUOUS for discard rather than randomly
    assigned, which keeps the error rate conservative.
    """
    if click1 and click2:
        return AMBIGUOUS
    if click1:
        return detected(Bit.ZERO)
    if click2:
        return detected(Bit.ONE)
    return NO_DETECTION


def sift(
    frames: list[SymbolFrame],
    settings: list[BobSetting],
    outcomes: list[DetectionOutcome],
) -> SiftResult:
    """Keep matched-basis symbols with a decided bit; tally every discard.

    Bucket priority: basis mismatch first, then (among matched) no-detection,
    ambiguous, and finally kept. The three discard counters plus the kept
    list partition the input.
    """
    if not (len(frames) == len(settings) == len(outcomes)):
        raise ConfigError(
            f"frames/settings/outcomes lengths differ: "
            f"{len(frames)}/{len(settings)}/{len(outcomes)}"
        )
    kept: list[tuple[int, Bit, Bit]] = []
    n_basis = n_nodet = n_ambig = 0
    for frame, setting, outcome in zip(frames, settings, outcomes):
        if frame.basis is not setting.basis:
            n_basis += 1
        elif outcome.verdict is Verdict.NO_DETECTION:
            n_nodet += 1
        elif outcome.verdict is Verdict.AMBIGUOUS:
            n_ambig += 1
        else:
            kept.append((frame.index, frame.bit, outcome.bit))
    return SiftResult(kept, n_basis, n_nodet, n_ambig)
