import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from hyperband.cube_io import GroundTruth, HyperCube, load_cube, load_ground_truth

REPO_ROOT = Path(__file__).resolve().parent.parent

INDIAN_PINES_HINT = (
    "Indian Pines dataset not available. Download Indian_pines.mat and "
    "Indian_pines_gt.mat, run scripts/convert_indian_pines.py, and either "
    "place the output under data/indian_pines/ or point HYPERBAND_INDIAN_PINES "
    "at the output directory (see README)."
)


def indian_pines_dir() -> Path | None:
    env = os.environ.get("HYPERBAND_INDIAN_PINES")
    candidates = [Path(env)] if env else []
    candidates.append(REPO_ROOT / "data" / "indian_pines")
    for cand in candidates:
        if (cand / "cube.json").is_file() and (cand / "gt.csv").is_file():
            return cand
    return None


@pytest.fixture(scope="session")
def indian_pines() -> tuple[HyperCube, GroundTruth]:
    where = indian_pines_dir()
    if where is None:
        pytest.skip(INDIAN_PINES_HINT)
    cube = load_cube(where / "cube.json")
    gt = load_ground_truth(where / "gt.csv", cube.n_rows, cube.n_cols)
    return cube, gt


@pytest.fixture
def tiny_cube() -> tuple[HyperCube, GroundTruth]:
    """3 bands x 2 x 2, all pixels labeled; band 0 encodes the labels."""
    labels = np.array([[1, 2], [2, 1]], dtype=np.int64)
    band0 = (labels * 100).astype(np.uint16)
    band1 = np.full((2, 2), 7, dtype=np.uint16)
    band2 = np.array([[0, 9], [4, 2]], dtype=np.uint16)
    return HyperCube(np.stack([band0, band1, band2])), GroundTruth(labels)
