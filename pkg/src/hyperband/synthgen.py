"""Synthetic cubes with planted relevance, redundancy, and complementarity.

Each band in the plan is one of:

``InformativeBand``
    A deterministic transform of the class map (label * scale + offset)
    plus optional uniform integer jitter in [0, jitter]. Large jitter
    relative to scale makes the band only weakly informative.

``DuplicateBand``
    A copy of an earlier band, optionally jittered. Exact duplicates
    (jitter 0) carry zero additional information by construction.

``XorBand``
    One of exactly two random bit-plane bands whose pixelwise XOR
    *defines* the class map (labels 1..2). Each bit band alone is
    independent of the labels, while the pair determines them exactly --
    the canonical complementarity case.

``NoiseBand``
    Uniform integers over [low, high], independent of everything.

Generation is deterministic given the spec's seed. The returned
expectation names the minimal sufficient band set and the planted
redundant set so selector tests can assert against ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cube_io import GroundTruth, HyperCube, U16_MAX, save_cube, save_ground_truth


@dataclass(frozen=True)
class InformativeBand:
    scale: float = 100.0
    offset: float = 0.0
    jitter: int = 0
    transform: str = "identity"  # identity | halves | parity

    TRANSFORMS = ("identity", "halves", "parity")

    def __post_init__(self):
        if self.transform not in self.TRANSFORMS:
            raise ValueError(f"unknown transform {self.transform!r}")


@dataclass(frozen=True)
class DuplicateBand:
    of: int
    jitter: int = 0


@dataclass(frozen=True)
class XorBand:
    pass


@dataclass(frozen=True)
class NoiseBand:
    low: int = 0
    high: int = U16_MAX


BandPlanEntry = InformativeBand | DuplicateBand | XorBand | NoiseBand


@dataclass(frozen=True)
class SynthSpec:
    plan: tuple[BandPlanEntry, ...]
    n_rows: int = 100
    n_cols: int = 100
    n_classes: int = 4
    seed: int = 0
    unlabeled_fraction: float = 0.0

    def __post_init__(self):
        if len(self.plan) < 1:
            raise ValueError("band plan must contain at least one band")
        if min(self.n_rows, self.n_cols) < 1 or self.n_classes < 1:
            raise ValueError("rows, cols, and n_classes must be >= 1")
        if not 0.0 <= self.unlabeled_fraction < 1.0:
            raise ValueError("unlabeled_fraction must be in [0, 1)")
        xor_count = sum(isinstance(e, XorBand) for e in self.plan)
        if xor_count not in (0, 2):
            raise ValueError(f"plan must contain exactly 0 or 2 xor bands, got {xor_count}")
        if xor_count == 2 and self.n_classes != 2:
            raise ValueError("xor plans define a 2-class map; set n_classes=2")
        for i, entry in enumerate(self.plan):
            if isinstance(entry, DuplicateBand) and not 0 <= entry.of < i:
                raise ValueError(
                    f"duplicate band {i} must reference an earlier band, got of={entry.of}"
                )


@dataclass(frozen=True)
class SynthExpectation:
    """What a correct selector should find on the generated cube."""

    minimal: frozenset[int]    # a minimal band set sufficient for the labels
    redundant: frozenset[int]  # bands adding nothing beyond the minimal set
    noise: frozenset[int]


def generate(spec: SynthSpec) -> tuple[HyperCube, GroundTruth, SynthExpectation]:
    """Build (cube, ground truth, expectation) deterministically from the spec."""
    rng = np.random.default_rng(spec.seed)
    shape = (spec.n_rows, spec.n_cols)
    xor_indices = [i for i, e in enumerate(spec.plan) if isinstance(e, XorBand)]

    if xor_indices:
        bit_a = rng.integers(0, 2, size=shape, dtype=np.int64)
        bit_b = rng.integers(0, 2, size=shape, dtype=np.int64)
        labels = (bit_a ^ bit_b) + 1
        xor_bits = {xor_indices[0]: bit_a, xor_indices[1]: bit_b}
    else:
        labels = rng.integers(1, spec.n_classes + 1, size=shape, dtype=np.int64)
        xor_bits = {}
    if spec.unlabeled_fraction > 0.0:
        drop = rng.random(shape) < spec.unlabeled_fraction
        labels = np.where(drop, 0, labels)
        if not (labels > 0).any():
            raise ValueError("unlabeled_fraction left no labeled pixels")

    bands: list[np.ndarray] = []
    for i, entry in enumerate(spec.plan):
        if isinstance(entry, XorBand):
            values = xor_bits[i] * U16_MAX
        elif isinstance(entry, InformativeBand):
            values = _transform_labels(labels, entry.transform, spec.n_classes) * entry.scale
            values = values + entry.offset
            if entry.jitter > 0:
                values = values + rng.integers(0, entry.jitter + 1, size=shape)
        elif isinstance(entry, DuplicateBand):
            values = bands[entry.of].astype(np.int64)
            if entry.jitter > 0:
                values = values + rng.integers(0, entry.jitter + 1, size=shape)
        else:
            values = rng.integers(entry.low, entry.high + 1, size=shape)
        bands.append(np.clip(np.asarray(values), 0, U16_MAX).astype(np.uint16))

    cube = HyperCube(np.stack(bands))
    gt = GroundTruth(labels)
    return cube, gt, _expectation(spec)


def _transform_labels(labels: np.ndarray, transform: str, n_classes: int) -> np.ndarray:
    """Label remappings for informative bands; 0 (unlabeled) stays 0.

    identity  t = label
    halves    t = 1 for the lower half of the class ids, 2 for the upper
    parity    t = 1 for odd class ids, 2 for even
    """
    if transform == "identity":
        return labels
    if transform == "halves":
        hi = labels > (n_classes + 1) // 2
        return np.where(labels == 0, 0, np.where(hi, 2, 1))
    lab_parity = np.where(labels % 2 == 1, 1, 2)
    return np.where(labels == 0, 0, lab_parity)


def _expectation(spec: SynthSpec) -> SynthExpectation:
    xor_bands = [i for i, e in enumerate(spec.plan) if isinstance(e, XorBand)]
    exact_dups = [i for i, e in enumerate(spec.plan)
                  if isinstance(e, DuplicateBand) and e.jitter == 0]
    noise = [i for i, e in enumerate(spec.plan) if isinstance(e, NoiseBand)]

    # the first informative band of each distinct label transform is needed;
    # further bands repeating a transform only re-encode the same partition
    minimal: list[int] = []
    repeat: list[int] = []
    seen: set[str] = set()
    for i, e in enumerate(spec.plan):
        if isinstance(e, InformativeBand):
            (repeat if e.transform in seen else minimal).append(i)
            seen.add(e.transform)

    if xor_bands:
        return SynthExpectation(
            minimal=frozenset(xor_bands),
            redundant=frozenset(exact_dups) | frozenset(minimal) | frozenset(repeat),
            noise=frozenset(noise),
        )
    return SynthExpectation(
        minimal=frozenset(minimal),
        redundant=frozenset(exact_dups) | frozenset(repeat),
        noise=frozenset(noise),
    )


def write_dataset(spec: SynthSpec, out_dir: str | Path,
                  provenance: dict | None = None) -> dict:
    """Generate and store a dataset in the standard cube/GT file formats."""
    cube, gt, expected = generate(spec)
    out_dir = Path(out_dir)
    header = save_cube(cube, out_dir / "cube.json", provenance=provenance)
    gt_path = save_ground_truth(gt, out_dir / "gt.csv")
    return {"cube": header, "gt": gt_path,
            "expected_minimal": sorted(expected.minimal),
            "expected_redundant": sorted(expected.redundant)}


# Canonical benchmark plans used by the selector contrast tests. Planted
# bands span the full 16-bit range so that averaging one uniform-noise band
# into the ground-truth estimate dilutes but does not drown the signal.

def duplicate_spec(seed: int = 0) -> SynthSpec:
    """A coarse informative band, its exact copy, a complementary band, noise.

    Band 0 separates the lower from the upper class ids at amplitudes
    {0, 32768}; band 2 partially separates odd from even ids in the
    disjoint [0, 20000) range. The two together nearly determine the
    class, and because their amplitude ranges stay disjoint inside the
    running average, band 0 remains an exact function of the quantized
    estimate: the copy (band 1) can never add information while the
    noise band still does, in sample.
    """
    # 120x120 rather than the 100x100 default: with C=4 and 256 bins the
    # plug-in MI bias of a pure-noise band is ~(255*3)/(2 N ln 2) bits, and
    # N = 14400 keeps that comfortably below the 0.05-bit noise ceiling.
    return SynthSpec(
        plan=(
            InformativeBand(scale=32768.0, offset=-32768.0, transform="halves"),
            DuplicateBand(of=0),
            InformativeBand(scale=8000.0, offset=-8000.0, transform="parity", jitter=11999),
            NoiseBand(),
        ),
        n_rows=120,
        n_cols=120,
        seed=seed,
    )


def xor_spec(seed: int = 0) -> SynthSpec:
    """Exactly the two complementary bit bands whose XOR is the class map."""
    return SynthSpec(plan=(XorBand(), XorBand()), n_classes=2, seed=seed)


def xor_contrast_spec(seed: int = 0) -> SynthSpec:
    """The XOR pair plus a weakly informative band that outranks both on raw MI."""
    return SynthSpec(
        plan=(XorBand(), XorBand(),
              InformativeBand(scale=8000.0, offset=19000.0, jitter=30000)),
        n_classes=2,
        seed=seed,
    )
