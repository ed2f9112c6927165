#!/usr/bin/env python3
"""Convert the Indian Pines .mat files into the cube/GT store format.

The AVIRIS Indian Pines scene (145 x 145 pixels, 220 bands, 16 labeled
classes over 10366 pixels) is commonly distributed as two MATLAB files:

    Indian_pines.mat     with variable 'indian_pines'    (145, 145, 220)
    Indian_pines_gt.mat  with variable 'indian_pines_gt' (145, 145)

Usage:

    python scripts/convert_indian_pines.py Indian_pines.mat Indian_pines_gt.mat \
        --out data/indian_pines

The output directory then contains cube.json / cube.u16 / gt.csv, which is
what the test suite and the CLI expect. Requires scipy for .mat parsing.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hyperband.cube_io import GroundTruth, HyperCube, save_cube, save_ground_truth


def _largest_array(mat: dict, min_ndim: int) -> np.ndarray:
    arrays = [v for k, v in mat.items()
              if not k.startswith("__") and isinstance(v, np.ndarray) and v.ndim >= min_ndim]
    if not arrays:
        raise SystemExit("no suitable array variable found in the .mat file")
    return max(arrays, key=lambda a: a.size)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("cube_mat", help="Indian_pines.mat (reflectance cube)")
    parser.add_argument("gt_mat", help="Indian_pines_gt.mat (class labels)")
    parser.add_argument("--out", default="data/indian_pines", help="output directory")
    args = parser.parse_args()

    from scipy.io import loadmat

    raw_cube = _largest_array(loadmat(args.cube_mat), min_ndim=3)
    raw_gt = _largest_array(loadmat(args.gt_mat), min_ndim=2)

    cube_vals = np.asarray(raw_cube)
    if cube_vals.ndim != 3:
        raise SystemExit(f"expected a 3-D cube, got shape {cube_vals.shape}")
    # stored (rows, cols, bands); we keep (band, row, col)
    cube_vals = np.transpose(cube_vals, (2, 0, 1))
    if cube_vals.min() < 0 or cube_vals.max() > 65535:
        raise SystemExit(
            f"cube values outside the 16-bit range: [{cube_vals.min()}, {cube_vals.max()}]")
    cube = HyperCube(cube_vals.astype(np.uint16))

    labels = np.asarray(raw_gt).astype(np.int64)
    if labels.shape != (cube.n_rows, cube.n_cols):
        raise SystemExit(
            f"ground truth shape {labels.shape} does not match cube "
            f"{(cube.n_rows, cube.n_cols)}")
    gt = GroundTruth(labels)

    out = Path(args.out)
    save_cube(cube, out / "cube.json",
              provenance={"source": Path(args.cube_mat).name})
    save_ground_truth(gt, out / "gt.csv")
    print(f"wrote {out}/cube.json ({cube.n_bands} bands, "
          f"{cube.n_rows}x{cube.n_cols}), gt.csv "
          f"({gt.n_classes} classes, {gt.labeled_count} labeled pixels)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
