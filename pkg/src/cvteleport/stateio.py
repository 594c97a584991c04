"""JSON and CSV serialization.

Complex matrices use a debug-friendly JSON layout: row-major nested lists of
[re, im] pairs.  CSV files carry a header row, '.' decimals and LF endings.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .defaults import DEFAULTS
from .fock import DensityMatrix, TwoModeState
from .grids import PhaseGrid

__all__ = [
    "matrix_to_rows",
    "rows_to_matrix",
    "density_matrix_to_dict",
    "two_mode_state_to_dict",
    "density_matrix_from_dict",
    "two_mode_state_from_dict",
    "save_json",
    "load_json",
    "load_two_mode_state",
    "write_csv",
    "kernel_grid_to_csv",
    "kernel_grid_to_json",
    "manifest",
]


def matrix_to_rows(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def rows_to_matrix(rows: Sequence) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("expected row-major nested lists of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def density_matrix_to_dict(rho: DensityMatrix) -> dict:
    return {
        "kind": "density_matrix",
        "n_max": rho.n_max,
        "leakage": rho.leakage,
        "rows": matrix_to_rows(rho.data),
    }


def density_matrix_from_dict(d: dict) -> DensityMatrix:
    return DensityMatrix(rows_to_matrix(d["rows"]), leakage=d.get("leakage", 0.0))


def two_mode_state_to_dict(state: TwoModeState) -> dict:
    out = {"kind": "two_mode_state", "n_max": state.n_max, "leakage": state.leakage}
    if state.schmidt is not None:
        out["schmidt"] = [float(c) for c in state.schmidt]
    elif state.pair_corr is not None:
        out["pair_corr"] = matrix_to_rows(state.pair_corr)
    else:
        out["rows"] = matrix_to_rows(state.data)
    return out


def two_mode_state_from_dict(d: dict) -> TwoModeState:
    n_max = int(d["n_max"])
    leakage = d.get("leakage", 0.0)
    if "schmidt" in d:
        return TwoModeState(
            n_max, schmidt=np.asarray(d["schmidt"], dtype=np.float64), leakage=leakage
        )
    if "pair_corr" in d:
        return TwoModeState(n_max, pair_corr=rows_to_matrix(d["pair_corr"]), leakage=leakage)
    return TwoModeState(n_max, data=rows_to_matrix(d["rows"]), leakage=leakage)


def save_json(path: Union[str, Path], payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_json(path: Union[str, Path]) -> dict:
    return json.loads(Path(path).read_text())


def load_two_mode_state(path: Union[str, Path]) -> TwoModeState:
    return two_mode_state_from_dict(load_json(path))


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def kernel_grid_to_csv(
    path: Union[str, Path],
    grid: PhaseGrid,
    values: np.ndarray,
    closed_form: Optional[np.ndarray] = None,
) -> None:
    pts = grid.points()
    values = np.asarray(values, dtype=np.float64).ravel()
    if closed_form is None:
        rows = zip(pts[:, 0], pts[:, 1], values)
        write_csv(path, ["x", "p", "P"], rows)
    else:
        closed = np.asarray(closed_form, dtype=np.float64).ravel()
        write_csv(path, ["x", "p", "P", "P_closed_form"], zip(pts[:, 0], pts[:, 1], values, closed))


def kernel_grid_to_json(
    path: Union[str, Path], grid: PhaseGrid, values: np.ndarray, meta: Optional[dict] = None
) -> None:
    payload = {
        "grid": {
            "extent": grid.extent,
            "resolution": grid.resolution,
            "spacing": grid.spacing,
            "order": "x-major",
        },
        "values": [float(v) for v in np.asarray(values, dtype=np.float64).ravel()],
    }
    if meta:
        payload.update(meta)
    save_json(path, payload)


def manifest(command: str, config: dict, results: dict, **extra) -> dict:
    """Run manifest skeleton: resolved config, defaults table, results."""
    out = {
        "command": command,
        "config": config,
        "defaults": dict(DEFAULTS),
        "results": results,
    }
    out.update(extra)
    return out
