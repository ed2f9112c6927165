"""Band-selection strategies over a cube / ground-truth pair.

Three forward filters are provided, all scored on labeled pixels only:

``select_ig``
    Information-gain ranking: the top-k bands by mutual information with
    the ground truth, ignoring inter-band redundancy.

``select_mi_threshold``
    Single-pass filter with redundancy control: bands are visited in
    decreasing MI order; a candidate is accepted iff folding it into the
    running ground-truth estimate (GTest <- (GTest + band)/2) increases
    I(GTest; GT) by more than a threshold. Rejected bands are never
    revisited.

``select_jmi``
    Greedy forward selection maximizing the joint mutual information
    JMI(GTest, band; GT) of the candidate band together with the running
    estimate, which rewards complementary bands and zeroes out exact
    duplicates.

All three start from the same band: the argmax of MI(band; GT), ties
broken by the lower band index. Ties in every argmax are broken the same
way, which makes the selectors deterministic functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cube_io import (
    DiscreteSeries,
    GroundTruth,
    HyperCube,
    QuantizationConfig,
    _check_alignment,
    global_value_range,
    labels_series,
    quantize_series,
)
from .infotheory import joint_mi, mutual_information

STOP_REACHED_K = "reached_k"
STOP_EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class GtEstimate:
    """Running ground-truth estimate: nested average of selected bands.

    Each update folds one band in via new = (old + band) / 2, so earlier
    bands decay geometrically; this is not the arithmetic mean. Values
    stay real-valued between updates and are only quantized when handed
    to an information estimator.
    """

    values: np.ndarray  # float64 over labeled pixels
    source_bands: tuple[int, ...]
    pixel_index: np.ndarray  # row-major flat indices of the labeled pixels

    @classmethod
    def from_band(cls, cube: HyperCube, gt: GroundTruth, band: int) -> "GtEstimate":
        pixel_index = gt.labeled_flat_indices()
        values = cube.band(band).ravel()[pixel_index].astype(np.float64)
        return cls(values, (band,), pixel_index)

    def quantized(self, cfg: QuantizationConfig,
                  global_range: tuple[float, float] | None = None) -> DiscreteSeries:
        return quantize_series(self.values, cfg, global_range=global_range)


def update_gtest(est: GtEstimate, cube: HyperCube, band: int) -> GtEstimate:
    """Fold one band into the estimate: values' = (values + band values) / 2."""
    band_values = cube.band(band).ravel()[est.pixel_index].astype(np.float64)
    return GtEstimate(
        (est.values + band_values) / 2.0,
        est.source_bands + (band,),
        est.pixel_index,
    )


@dataclass(frozen=True)
class SelectionTrace:
    """Ordered selection result plus per-step diagnostics.

    criterion_values[i] is the winning criterion at step i: the MI with
    the ground truth for select_ig and for accepted bands of the MI
    filter, the winning JMI for select_jmi. rejected / rejected_values
    are populated by the MI filter only, in encounter order.
    """

    selected: tuple[int, ...]
    criterion_values: tuple[float, ...]
    stop_reason: str
    rejected: tuple[int, ...] = ()
    rejected_values: tuple[float, ...] = ()

    def __post_init__(self):
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("selection trace contains duplicate bands")
        if len(self.criterion_values) != len(self.selected):
            raise ValueError("criterion_values length must match selected length")
        if self.stop_reason not in (STOP_REACHED_K, STOP_EXHAUSTED):
            raise ValueError(f"unknown stop_reason {self.stop_reason!r}")


@dataclass(frozen=True)
class SelectorConfig:
    """Bundle of selection knobs, kept alongside results for provenance."""

    k: int
    threshold: float | None = None
    quantization: QuantizationConfig = field(default_factory=QuantizationConfig)
    seed: int = 0


def _check_k(k: int, n_bands: int) -> None:
    if not 1 <= k <= n_bands:
        raise ValueError(f"k={k} out of range [1, {n_bands}]")


def _band_series_matrix(cube: HyperCube, gt: GroundTruth,
                        cfg: QuantizationConfig) -> np.ndarray:
    """Quantized bins for every band over labeled pixels: (n_bands, n_labeled)."""
    _check_alignment(cube, gt)
    pixel_index = gt.labeled_flat_indices()
    flat = cube.values.reshape(cube.n_bands, -1)[:, pixel_index].astype(np.float64)
    if cfg.strategy == "global-min-max":
        lo, hi = global_value_range(cube, gt)
        los = np.full(cube.n_bands, lo)
        his = np.full(cube.n_bands, hi)
    else:
        los = flat.min(axis=1)
        his = flat.max(axis=1)
    span = his - los + 1.0
    bins = np.floor((flat - los[:, None]) * (float(cfg.n_bins) / span[:, None]))
    bins = bins.astype(np.int64)
    bins[his <= los, :] = 0  # constant bands collapse to bin 0
    return bins


def mi_profile(cube: HyperCube, gt: GroundTruth, cfg: QuantizationConfig) -> np.ndarray:
    """I(band; GT) for every band, in bits."""
    labels = labels_series(gt)
    bins = _band_series_matrix(cube, gt, cfg)
    profile = np.empty(cube.n_bands)
    for i in range(cube.n_bands):
        profile[i] = mutual_information(DiscreteSeries(bins[i], cfg.n_bins), labels)
    return profile


def _descending_order(profile: np.ndarray) -> np.ndarray:
    # stable sort on -profile keeps equal-MI bands in ascending index order
    return np.argsort(-profile, kind="stable")


def select_ig(cube: HyperCube, gt: GroundTruth, cfg: QuantizationConfig,
              k: int) -> SelectionTrace:
    """Top-k bands by MI with the ground truth, descending."""
    _check_k(k, cube.n_bands)
    profile = mi_profile(cube, gt, cfg)
    order = _descending_order(profile)[:k]
    return SelectionTrace(
        selected=tuple(int(b) for b in order),
        criterion_values=tuple(float(profile[b]) for b in order),
        stop_reason=STOP_REACHED_K,
    )


def select_mi_threshold(cube: HyperCube, gt: GroundTruth, cfg: QuantizationConfig,
                        k: int, th: float) -> SelectionTrace:
    """Threshold-controlled MI filter (single pass over the MI ranking).

    The first band (argmax MI) seeds GTest. Every further candidate, in
    decreasing-MI order, is tentatively averaged into GTest and accepted
    iff I(GTest'; GT) - I(GTest; GT) > th. Acceptance updates GTest;
    rejection is final. Stops at k accepted bands or when the ranking is
    exhausted.
    """
    _check_k(k, cube.n_bands)
    labels = labels_series(gt)
    profile = mi_profile(cube, gt, cfg)
    order = _descending_order(profile)
    glob = global_value_range(cube, gt) if cfg.strategy == "global-min-max" else None

    first = int(order[0])
    est = GtEstimate.from_band(cube, gt, first)
    current_mi = mutual_information(est.quantized(cfg, glob), labels)
    selected = [first]
    criterion_values = [current_mi]
    rejected: list[int] = []
    rejected_values: list[float] = []

    for cand in order[1:]:
        if len(selected) >= k:
            break
        cand = int(cand)
        tentative = update_gtest(est, cube, cand)
        new_mi = mutual_information(tentative.quantized(cfg, glob), labels)
        if new_mi - current_mi > th:
            est = tentative
            current_mi = new_mi
            selected.append(cand)
            criterion_values.append(new_mi)
        else:
            rejected.append(cand)
            rejected_values.append(new_mi)

    stop = STOP_REACHED_K if len(selected) >= k else STOP_EXHAUSTED
    return SelectionTrace(
        selected=tuple(selected),
        criterion_values=tuple(criterion_values),
        stop_reason=stop,
        rejected=tuple(rejected),
        rejected_values=tuple(rejected_values),
    )


def select_jmi(cube: HyperCube, gt: GroundTruth, cfg: QuantizationConfig,
               k: int) -> SelectionTrace:
    """Greedy forward selection by joint mutual information.

    Starts from the argmax-MI band; at each later step picks the band
    maximizing JMI(GTest, band; GT) over the remaining candidates (ties
    to the lower index) and folds it into GTest.
    """
    _check_k(k, cube.n_bands)
    labels = labels_series(gt)
    band_bins = _band_series_matrix(cube, gt, cfg)
    profile = mi_profile(cube, gt, cfg)
    glob = global_value_range(cube, gt) if cfg.strategy == "global-min-max" else None

    first = int(_descending_order(profile)[0])
    est = GtEstimate.from_band(cube, gt, first)
    selected = [first]
    criterion_values = [float(profile[first])]
    remaining = [b for b in range(cube.n_bands) if b != first]

    while len(selected) < k:
        gtq = est.quantized(cfg, glob)
        best_band = -1
        best_value = -np.inf
        for cand in remaining:
            value = joint_mi(gtq, DiscreteSeries(band_bins[cand], cfg.n_bins), labels)
            if value > best_value:
                best_value = value
                best_band = cand
        selected.append(best_band)
        criterion_values.append(best_value)
        remaining.remove(best_band)
        est = update_gtest(est, cube, best_band)

    return SelectionTrace(
        selected=tuple(selected),
        criterion_values=tuple(criterion_values),
        stop_reason=STOP_REACHED_K,
    )


SELECTOR_NAMES = ("ig", "mi_th", "jmi")


def run_selector(name: str, cube: HyperCube, gt: GroundTruth,
                 cfg: QuantizationConfig, k: int,
                 th: float | None = None) -> SelectionTrace:
    """Dispatch by selector name; th is required for (and only for) mi_th."""
    if name == "ig":
        return select_ig(cube, gt, cfg, k)
    if name == "jmi":
        return select_jmi(cube, gt, cfg, k)
    if name == "mi_th":
        if th is None:
            raise ValueError("selector mi_th requires a threshold")
        return select_mi_threshold(cube, gt, cfg, k, th)
    raise ValueError(f"unknown selector {name!r}, expected one of {SELECTOR_NAMES}")
