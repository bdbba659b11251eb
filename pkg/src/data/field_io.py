# -*- coding: utf-8 -*-
"""
Field I/O for spinframe.
Writes JSON reports, CSV field dumps, legacy ASCII VTK structured points and
numpy field bundles, and reads CSV dumps and bundles back.
"""

from pathlib import Path
from typing import Any, Dict, Optional
import json
import logging

import numpy as np
import pandas as pd

from src.data.data_models import Grid, Lattice, SpinFrameError
from src.utils.config import config


class FieldIOError(SpinFrameError):
    """Raised for missing inputs or unwritable output paths."""
    pass


VECTOR_SUFFIXES = ('1', '2', '3')
SPINOR_COLUMNS = ('alpha_re', 'alpha_im', 'beta_re', 'beta_im')


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps_report(report: Dict[str, Any]) -> str:
    """Serialize a report with stable key order; floats round-trip exactly."""
    return json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"


class FieldIO:
    """
    Writer and reader for everything a job puts on disk.
    All paths are resolved against one output directory.
    """

    def __init__(self, output_dir: Optional[Path] = None):
        """Initialize with the output directory (created lazily)."""
        self.output_dir = Path(output_dir) if output_dir is not None else config.output_dir
        self.float_format = f"%.{config.CSV_SIGNIFICANT_DIGITS}g"
        self.logger = logging.getLogger(__name__)

    def _target(self, name: str) -> Path:
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise FieldIOError(f"Cannot create output directory {self.output_dir}: {e}") from e
        return self.output_dir / name

    def _write_text(self, name: str, text: str) -> Path:
        path = self._target(name)
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise FieldIOError(f"Cannot write {path}: {e}") from e
        self.logger.debug(f"Wrote {path}")
        return path

    def write_report(self, name: str, report: Dict[str, Any]) -> Path:
        """
        Write `<name>.json`.

        Args:
            name: Report base name
            report: Deterministic report content; timestamps go to `write_meta`

        Returns:
            Path of the report file
        """
        path = self._write_text(f"{name}.json", dumps_report(report))
        self.logger.info(f"Report written: {path}")
        return path

    def write_meta(self, name: str, meta: Dict[str, Any]) -> Path:
        """Write run metadata to `<name>.meta.json`."""
        return self._write_text(f"{name}.meta.json", dumps_report(meta))

    def field_frame(self, grid: Grid, lattice: Lattice, vectors: Optional[Dict[str, np.ndarray]] = None,
                    spinors: Optional[Dict[str, np.ndarray]] = None) -> pd.DataFrame:
        """
        Tabulate fields node by node, x fastest.

        Args:
            grid: Sampling grid
            lattice: Lattice for the node positions
            vectors: Name -> array (3, n1, n2, n3); columns NAME_1..NAME_3
            spinors: Name -> array (2, n1, n2, n3); columns NAME_alpha_re, ...

        Returns:
            DataFrame with columns x, y, z followed by the field components
        """
        positions = grid.positions(lattice)
        columns: Dict[str, np.ndarray] = {
            axis: np.reshape(positions[i], -1, order='F') for i, axis in enumerate(('x', 'y', 'z'))
        }
        for name, data in (vectors or {}).items():
            for i, suffix in enumerate(VECTOR_SUFFIXES):
                columns[f"{name}_{suffix}"] = np.reshape(np.asarray(data[i], dtype=float), -1, order='F')
        for name, data in (spinors or {}).items():
            parts = (data[0].real, data[0].imag, data[1].real, data[1].imag)
            for suffix, part in zip(SPINOR_COLUMNS, parts):
                columns[f"{name}_{suffix}"] = np.reshape(part, -1, order='F')
        return pd.DataFrame(columns)

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        """Write a field table with 17 significant digits."""
        path = self._target(name)
        try:
            frame.to_csv(path, index=False, float_format=self.float_format, lineterminator="\n")
        except OSError as e:
            raise FieldIOError(f"Cannot write {path}: {e}") from e
        self.logger.info(f"CSV written: {path} ({len(frame)} rows)")
        return path

    @staticmethod
    def read_field_csv(path: Path) -> pd.DataFrame:
        """Read a field table back with exact float round-trip."""
        path = Path(path)
        if not path.exists():
            raise FieldIOError(f"CSV file not found: {path}")
        return pd.read_csv(path, float_precision='round_trip')

    @staticmethod
    def column_field(frame: pd.DataFrame, name: str, grid: Grid) -> np.ndarray:
        """Rebuild a (3, n1, n2, n3) vector field from its table columns."""
        return np.array([
            np.reshape(frame[f"{name}_{suffix}"].to_numpy(), grid.shape, order='F') for suffix in VECTOR_SUFFIXES
        ])

    def write_vtk(self, name: str, grid: Grid, lattice: Lattice, title: str,
                  vectors: Optional[Dict[str, np.ndarray]] = None,
                  scalars: Optional[Dict[str, np.ndarray]] = None) -> Path:
        """
        Write a legacy ASCII VTK STRUCTURED_POINTS file.

        Spacing is the length of each lattice generator over n; it is exact
        only for orthogonal lattices, which the title line records.
        """
        spacing = np.linalg.norm(lattice.matrix, axis=0) / np.array(grid.n)
        fmt = self.float_format
        if not lattice.is_orthogonal:
            title = f"{title} (non-orthogonal lattice; spacing approximate)"
        lines = [
            "# vtk DataFile Version 3.0",
            title,
            "ASCII",
            "DATASET STRUCTURED_POINTS",
            "DIMENSIONS {} {} {}".format(*grid.n),
            "ORIGIN 0 0 0",
            "SPACING " + " ".join(fmt % s for s in spacing),
            f"POINT_DATA {grid.size}",
        ]
        for field_name, data in (vectors or {}).items():
            lines.append(f"VECTORS {field_name} double")
            flat = np.reshape(np.asarray(data, dtype=float), (3, -1), order='F')
            lines.extend(" ".join(fmt % v for v in node) for node in flat.T)
        for field_name, data in (scalars or {}).items():
            lines.append(f"SCALARS {field_name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(fmt % v for v in np.reshape(np.asarray(data, dtype=float), -1, order='F'))
        path = self._write_text(name, "\n".join(lines) + "\n")
        self.logger.info(f"VTK written: {path}")
        return path

    def save_bundle(self, name: str, arrays: Dict[str, np.ndarray]) -> Path:
        """Save computed fields as `<name>.npz` for later export."""
        path = self._target(f"{name}.npz")
        try:
            np.savez(path, **arrays)
        except OSError as e:
            raise FieldIOError(f"Cannot write {path}: {e}") from e
        self.logger.info(f"Field bundle saved: {path}")
        return path

    def load_bundle(self, name: str) -> Dict[str, np.ndarray]:
        """Load `<name>.npz` from the output directory."""
        path = self.output_dir / f"{name}.npz"
        if not path.exists():
            raise FieldIOError(f"Field bundle not found: {path}; run 'framing' or 'spectrum' first")
        with np.load(path) as bundle:
            return {key: bundle[key] for key in bundle.files}
