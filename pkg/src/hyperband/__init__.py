"""hyperband: information-theoretic band selection for hyperspectral cubes.

Pipeline surface:

- :mod:`hyperband.cube_io`     cube / ground-truth files and quantization
- :mod:`hyperband.infotheory`  discrete entropy, MI, conditional MI, joint MI
- :mod:`hyperband.selectors`   information-gain ranking, threshold MI filter,
                               and joint-MI forward selection
- :mod:`hyperband.evaluation`  stratified splits, one-vs-one SVM / kNN,
                               accuracy reports and sweeps
- :mod:`hyperband.synthgen`    planted-structure benchmark generators
- :mod:`hyperband.cli`         the ``hyperband`` command-line entry point
"""

from .cube_io import (
    DiscreteSeries,
    GroundTruth,
    HyperCube,
    QuantizationConfig,
    labels_series,
    load_cube,
    load_ground_truth,
    quantize_band,
    save_cube,
    save_ground_truth,
)
from .infotheory import (
    JointHistogram,
    conditional_mi,
    entropy,
    joint_entropy,
    joint_mi,
    mutual_information,
)
from .selectors import (
    GtEstimate,
    SelectionTrace,
    SelectorConfig,
    mi_profile,
    select_ig,
    select_jmi,
    select_mi_threshold,
    update_gtest,
)
from .evaluation import (
    EvalReport,
    SplitPlan,
    SvmModel,
    SvmParams,
    accuracy_sweep,
    classification_map,
    evaluate,
    stratified_split,
    train_knn,
    train_svm,
)
from .synthgen import SynthSpec, generate

__version__ = "0.1.0"
