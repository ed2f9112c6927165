"""Train/test splitting, classification over band subsets, and reporting.

The split protocol halves every class independently: for each class the
labeled pixels are shuffled and the first ceil(n/2) go to training, the
rest to test. Shuffling uses an explicitly documented PRNG (see
XorShift64Star) so another implementation, in any language, can
reproduce the exact same index sets from the same seed.

The default classifier is a one-vs-one soft-margin SVM (rbf kernel,
C=100, gamma = 1/n_bands after per-band [0,1] scaling from training
statistics); a 5-nearest-neighbor backend is available to sanity-check
selection quality independently of the SVM.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cube_io import GroundTruth, HyperCube, QuantizationConfig
from .selectors import run_selector
from .svm import BinaryMachine, kernel_matrix, smo_solve

_MASK64 = (1 << 64) - 1
_SV_EPS = 1e-12


class XorShift64Star:
    """xorshift64* PRNG (Marsaglia xorshift with a multiplicative output mix).

    State transition, all arithmetic mod 2**64:

        x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27;  output = x * 2685821657736338717

    (the multiplier is 0x2545F4914F6CDD1D). A zero seed is remapped to
    0x9E3779B97F4A7C15 since zero is a fixed point. ``below(n)`` reduces
    an output modulo n. This exact recipe is the cross-implementation
    contract for reproducible splits.
    """

    MULTIPLIER = 0x2545F4914F6CDD1D
    ZERO_SEED = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self._state = seed & _MASK64
        if self._state == 0:
            self._state = self.ZERO_SEED

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x = (x ^ (x << 25)) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * self.MULTIPLIER) & _MASK64

    def below(self, n: int) -> int:
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, drawing j = below(i + 1) from i = n-1 down to 1."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def worker_count() -> int:
    """Worker cap from HYPERBAND_THREADS (unset or 0 means auto)."""
    raw = os.environ.get("HYPERBAND_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HYPERBAND_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError("HYPERBAND_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class SplitPlan:
    """Per-class half/half partition of the labeled pixels.

    train_idx / test_idx index into the labeled-pixel order (the same
    row-major order used by every DiscreteSeries). labels and
    pixel_index carry the per-labeled-pixel class ids and flat image
    positions so downstream stages need no further access to the
    ground truth.
    """

    seed: int
    train_idx: np.ndarray
    test_idx: np.ndarray
    labels: np.ndarray        # class id per labeled pixel
    pixel_index: np.ndarray   # row-major flat image index per labeled pixel
    train_counts: np.ndarray  # per class 1..C at positions 0..C-1
    test_counts: np.ndarray
    single_pixel_classes: tuple[int, ...] = ()


def stratified_split(gt: GroundTruth, seed: int) -> SplitPlan:
    """Split each class half/half; odd counts put the extra pixel in train.

    Classes with a single labeled pixel contribute it to training and
    are flagged in single_pixel_classes.
    """
    pixel_index = gt.labeled_flat_indices()
    labels = gt.labels.ravel()[pixel_index].astype(np.int64)
    n_classes = gt.n_classes
    rng = XorShift64Star(seed)

    train: list[int] = []
    test: list[int] = []
    train_counts = np.zeros(n_classes, dtype=np.int64)
    test_counts = np.zeros(n_classes, dtype=np.int64)
    singles: list[int] = []
    for c in range(1, n_classes + 1):
        members = np.flatnonzero(labels == c).tolist()
        if not members:
            continue
        if len(members) == 1:
            singles.append(c)
        rng.shuffle(members)
        n_train = (len(members) + 1) // 2
        train.extend(members[:n_train])
        test.extend(members[n_train:])
        train_counts[c - 1] = n_train
        test_counts[c - 1] = len(members) - n_train

    return SplitPlan(
        seed=seed,
        train_idx=np.sort(np.asarray(train, dtype=np.int64)),
        test_idx=np.sort(np.asarray(test, dtype=np.int64)),
        labels=labels,
        pixel_index=pixel_index,
        train_counts=train_counts,
        test_counts=test_counts,
        single_pixel_classes=tuple(singles),
    )


@dataclass(frozen=True)
class SvmParams:
    kernel: str = "rbf"
    C: float = 100.0
    gamma: float | None = None  # None -> 1 / n_selected_bands
    tol: float = 1e-3

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")


def _subset_features(cube: HyperCube, pixel_index: np.ndarray,
                     subset: tuple[int, ...] | list[int]) -> np.ndarray:
    """Raw reflectances of the labeled pixels at the given bands: (n_labeled, n_bands)."""
    if len(subset) == 0:
        raise ValueError("band subset is empty")
    for b in subset:
        if not 0 <= b < cube.n_bands:
            raise IndexError(f"band {b} out of range [0, {cube.n_bands})")
    flat = cube.values.reshape(cube.n_bands, -1)
    return flat[np.asarray(subset, dtype=np.int64)][:, pixel_index].T.astype(np.float64)


def _apply_scaling(X: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = (X - lo) / safe
    scaled[:, span == 0] = 0.0
    return scaled


@dataclass(frozen=True)
class SvmModel:
    """One-vs-one SVM ensemble over a band subset.

    Stores the [0,1] feature-scaling bounds derived from the training
    pixels and the scaled training matrix the support indices refer to.
    """

    params: SvmParams
    gamma: float
    band_subset: tuple[int, ...]
    classes: tuple[int, ...]
    scale_lo: np.ndarray
    scale_hi: np.ndarray
    train_features: np.ndarray  # scaled, (n_train, n_bands)
    machines: tuple[BinaryMachine, ...]

    def predict(self, X_raw: np.ndarray) -> np.ndarray:
        """Majority-vote class ids for raw-feature rows; ties to the lowest id."""
        Xs = _apply_scaling(X_raw, self.scale_lo, self.scale_hi)
        votes = np.zeros((Xs.shape[0], len(self.classes)), dtype=np.int64)
        class_pos = {c: i for i, c in enumerate(self.classes)}
        for mach in self.machines:
            K = kernel_matrix(self.params.kernel, Xs,
                              self.train_features[mach.support], self.gamma)
            dec = mach.decision(K)
            pos_vote = dec >= 0  # exact zero goes to the lower class id
            votes[pos_vote, class_pos[mach.pos_class]] += 1
            votes[~pos_vote, class_pos[mach.neg_class]] += 1
        return np.asarray(self.classes, dtype=np.int64)[np.argmax(votes, axis=1)]


@dataclass(frozen=True)
class KnnModel:
    """k-nearest-neighbor fallback backend (Euclidean on scaled features)."""

    n_neighbors: int
    band_subset: tuple[int, ...]
    classes: tuple[int, ...]
    scale_lo: np.ndarray
    scale_hi: np.ndarray
    train_features: np.ndarray
    train_labels: np.ndarray

    def predict(self, X_raw: np.ndarray) -> np.ndarray:
        Xs = _apply_scaling(X_raw, self.scale_lo, self.scale_hi)
        n_classes = max(self.classes)
        out = np.empty(Xs.shape[0], dtype=np.int64)
        block = 512
        sq_train = (self.train_features ** 2).sum(axis=1)
        for start in range(0, Xs.shape[0], block):
            chunk = Xs[start:start + block]
            d2 = ((chunk ** 2).sum(axis=1)[:, None] + sq_train[None, :]
                  - 2.0 * chunk @ self.train_features.T)
            # stable sort keeps equal-distance neighbors in training order
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :self.n_neighbors]
            neigh_labels = self.train_labels[nearest]
            for r in range(neigh_labels.shape[0]):
                counts = np.bincount(neigh_labels[r], minlength=n_classes + 1)
                out[start + r] = int(np.argmax(counts[1:]) + 1)
        return out


def train_svm(cube: HyperCube, subset: tuple[int, ...] | list[int],
              split: SplitPlan, params: SvmParams = SvmParams()) -> SvmModel:
    """Train the one-vs-one ensemble on the split's training pixels.

    Features are the subset bands scaled to [0,1] per band from training
    min/max. Each class pair gets an SMO-trained binary machine; pairs
    train independently, optionally across worker threads.
    """
    X = _subset_features(cube, split.pixel_index, subset)
    X_train = X[split.train_idx]
    y_train = split.labels[split.train_idx]

    classes = tuple(range(1, int(split.labels.max()) + 1))
    present = np.unique(y_train)
    missing = [c for c in classes if c not in present]
    if missing:
        raise ValueError(f"classes absent from training split: {missing}")
    if len(classes) < 2:
        raise ValueError("need at least two classes to train")

    lo = X_train.min(axis=0)
    hi = X_train.max(axis=0)
    X_train_scaled = _apply_scaling(X_train, lo, hi)
    gamma = params.gamma if params.gamma is not None else 1.0 / len(subset)

    pairs = [(ci, cj) for idx, ci in enumerate(classes) for cj in classes[idx + 1:]]

    def train_pair(pair: tuple[int, int]) -> BinaryMachine:
        ci, cj = pair
        rows = np.flatnonzero((y_train == ci) | (y_train == cj))
        y = np.where(y_train[rows] == ci, 1.0, -1.0)
        K = kernel_matrix(params.kernel, X_train_scaled[rows], X_train_scaled[rows], gamma)
        result = smo_solve(K, y, params.C, tol=params.tol)
        sv_local = np.flatnonzero(result.alpha > _SV_EPS)
        return BinaryMachine(
            pos_class=ci,
            neg_class=cj,
            support=rows[sv_local],
            dual_coef=(result.alpha * y)[sv_local],
            bias=result.bias,
            iterations=result.iterations,
            converged=result.converged,
        )

    workers = min(worker_count(), len(pairs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            machines = tuple(pool.map(train_pair, pairs))
    else:
        machines = tuple(train_pair(p) for p in pairs)

    return SvmModel(
        params=params,
        gamma=gamma,
        band_subset=tuple(int(b) for b in subset),
        classes=classes,
        scale_lo=lo,
        scale_hi=hi,
        train_features=X_train_scaled,
        machines=machines,
    )


def train_knn(cube: HyperCube, subset: tuple[int, ...] | list[int],
              split: SplitPlan, n_neighbors: int = 5) -> KnnModel:
    X = _subset_features(cube, split.pixel_index, subset)
    X_train = X[split.train_idx]
    lo = X_train.min(axis=0)
    hi = X_train.max(axis=0)
    return KnnModel(
        n_neighbors=n_neighbors,
        band_subset=tuple(int(b) for b in subset),
        classes=tuple(range(1, int(split.labels.max()) + 1)),
        scale_lo=lo,
        scale_hi=hi,
        train_features=_apply_scaling(X_train, lo, hi),
        train_labels=split.labels[split.train_idx],
    )


@dataclass(frozen=True)
class EvalReport:
    """Accuracy summary of one model over one split's test pixels."""

    overall_accuracy: float            # percent
    per_class_accuracy: np.ndarray     # percent per class 1..C; NaN if no test pixels
    confusion: np.ndarray              # (C, C) counts, rows true, cols predicted
    band_subset: tuple[int, ...]
    seed: int
    classifier: str = "svm"


def evaluate(model: SvmModel | KnnModel, cube: HyperCube,
             subset: tuple[int, ...] | list[int], split: SplitPlan) -> EvalReport:
    """Predict the test pixels and assemble the accuracy report."""
    subset = tuple(int(b) for b in subset)
    if subset != model.band_subset:
        raise ValueError(
            f"subset {subset} does not match the model's training subset {model.band_subset}"
        )
    X = _subset_features(cube, split.pixel_index, subset)
    predicted = model.predict(X[split.test_idx])
    truth = split.labels[split.test_idx]

    n_classes = int(split.labels.max())
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (truth - 1, predicted - 1), 1)

    total = confusion.sum()
    overall = 100.0 * np.trace(confusion) / total if total else float("nan")
    class_totals = confusion.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = 100.0 * np.diag(confusion) / class_totals
    per_class = np.where(class_totals > 0, per_class, np.nan)

    classifier = "svm" if isinstance(model, SvmModel) else "knn"
    return EvalReport(
        overall_accuracy=float(overall),
        per_class_accuracy=per_class,
        confusion=confusion,
        band_subset=subset,
        seed=split.seed,
        classifier=classifier,
    )


def _train_backend(classifier: str, cube: HyperCube, subset, split: SplitPlan,
                   params: SvmParams) -> SvmModel | KnnModel:
    if classifier == "svm":
        return train_svm(cube, subset, split, params)
    if classifier == "knn":
        return train_knn(cube, subset, split)
    raise ValueError(f"unknown classifier {classifier!r}, expected 'svm' or 'knn'")


def accuracy_sweep(cube: HyperCube, gt: GroundTruth, selector: str,
                   ks: list[int], *,
                   quantization: QuantizationConfig = QuantizationConfig(),
                   svm_params: SvmParams = SvmParams(),
                   classifier: str = "svm",
                   seed: int = 0,
                   th: float | None = None) -> list[tuple[int, EvalReport]]:
    """Accuracy-vs-band-count curve for one selector and one split seed.

    ig and jmi selections are prefix-consistent, so the trace is computed
    once at max(ks) and sliced; the threshold filter is rerun per k.
    """
    if ks != sorted(ks):
        raise ValueError("ks must be sorted ascending")
    if not ks:
        raise ValueError("ks must be non-empty")
    if ks[-1] > cube.n_bands:
        raise ValueError(f"k={ks[-1]} exceeds the band count {cube.n_bands}")

    split = stratified_split(gt, seed)
    results: list[tuple[int, EvalReport]] = []
    if selector in ("ig", "jmi"):
        trace = run_selector(selector, cube, gt, quantization, ks[-1])
        for k in ks:
            subset = trace.selected[:k]
            model = _train_backend(classifier, cube, subset, split, svm_params)
            results.append((k, evaluate(model, cube, subset, split)))
    else:
        for k in ks:
            trace = run_selector(selector, cube, gt, quantization, k, th=th)
            subset = trace.selected
            model = _train_backend(classifier, cube, subset, split, svm_params)
            results.append((k, evaluate(model, cube, subset, split)))
    return results


def classification_map(model: SvmModel | KnnModel, cube: HyperCube,
                       subset: tuple[int, ...] | list[int],
                       gt: GroundTruth) -> np.ndarray:
    """Predicted label per labeled pixel, 0 elsewhere, as a 2-D grid."""
    subset = tuple(int(b) for b in subset)
    if subset != model.band_subset:
        raise ValueError("subset does not match the model's training subset")
    pixel_index = gt.labeled_flat_indices()
    X = _subset_features(cube, pixel_index, subset)
    predicted = model.predict(X)
    grid = np.zeros(gt.labels.size, dtype=np.int64)
    grid[pixel_index] = predicted
    return grid.reshape(gt.labels.shape)
