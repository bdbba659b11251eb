# -*- coding: utf-8 -*-
"""
Job configuration validation for spinframe.
Loads the JSON job file, checks every value and builds the domain objects,
reporting failures with the line they come from.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
import json
import logging

from src.data.data_models import (
    ConformalFactor, Grid, InvariantViolationError, Lattice, OperatorSpec, SpinFrameError, SpinStructure
)
from src.utils.config import config


logger = logging.getLogger(__name__)


class ConfigValidationError(SpinFrameError, ValueError):
    """Raised when a job configuration is invalid; carries the offending line."""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None,
                 source: Optional[str] = None):
        self.reason = message
        self.line = line
        self.key = key
        self.source = source
        location = source or "<config>"
        if line is not None:
            location = f"{location}:{line}"
        prefix = f"{location}: {key}: " if key else f"{location}: "
        super().__init__(prefix + message)


FRAMING_SOURCES = ('eigenpair', 'plane_wave')
EXPORT_FORMATS = ('csv', 'vtk')
THRESHOLD_KEYS = ('divergence', 'orthogonality', 'length_spread')


@dataclass(frozen=True)
class SolverSettings:
    """Eigensolver block of a job."""

    count: int = 14
    tol: float = config.SOLVER_TOL
    max_iter: int = config.SOLVER_MAX_ITER
    seed: int = config.SOLVER_SEED


@dataclass(frozen=True)
class FramingSelection:
    """Which spinor a framing is built from."""

    source: str = 'eigenpair'
    index: Optional[int] = None  # None: smallest positive eigenvalue
    k_index: Tuple[int, int, int] = (1, 0, 0)
    sign: int = 1


@dataclass(frozen=True)
class VerifySettings:
    """Verification suite settings."""

    trials: int = config.COMMUTATION_TRIALS
    kernel_tol: float = config.KERNEL_TOL
    dense_oracle: bool = False


@dataclass(frozen=True)
class OutputSettings:
    """Where and how results are written."""

    dir: Path = field(default_factory=lambda: config.output_dir)
    prefix: str = 'spinframe'
    formats: Tuple[str, ...] = EXPORT_FORMATS


@dataclass(frozen=True)
class JobConfig:
    """A validated job: geometry, solver, framing, verification and output settings."""

    lattice: Lattice
    spin: SpinStructure
    grid: Grid
    conformal: Optional[ConformalFactor] = None
    rescale: Optional[ConformalFactor] = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    framing: FramingSelection = field(default_factory=FramingSelection)
    verify: VerifySettings = field(default_factory=VerifySettings)
    thresholds: Dict[str, float] = field(default_factory=dict)
    output: OutputSettings = field(default_factory=OutputSettings)
    export_bundles: Tuple[str, ...] = ('framing',)
    source: Optional[str] = None

    @property
    def spec(self) -> OperatorSpec:
        """Operator specification of the job."""
        return OperatorSpec(self.lattice, self.spin, self.grid, self.conformal)

    def with_overrides(self, seed: Optional[int] = None, out: Optional[str] = None,
                       dense_oracle: Optional[bool] = None) -> 'JobConfig':
        """Apply command-line overrides."""
        job = self
        if seed is not None:
            job = replace(job, solver=replace(job.solver, seed=int(seed)))
        if out is not None:
            job = replace(job, output=replace(job.output, dir=Path(out)))
        if dense_oracle:
            job = replace(job, verify=replace(job.verify, dense_oracle=True))
        return job

    def to_dict(self) -> Dict[str, Any]:
        """Convert to the JSON schema (output paths excluded)."""
        return {
            'lattice': self.lattice.to_dict(),
            'spin': self.spin.to_dict(),
            'grid': self.grid.to_dict(),
            'conformal': None if self.conformal is None else self.conformal.to_dict(),
            'rescale': None if self.rescale is None else self.rescale.to_dict(),
            'solver': {
                'count': self.solver.count,
                'tol': self.solver.tol,
                'max_iter': self.solver.max_iter,
                'seed': self.solver.seed
            },
            'framing': {
                'source': self.framing.source,
                'index': self.framing.index,
                'k_index': list(self.framing.k_index),
                'sign': self.framing.sign
            },
            'verify': {
                'trials': self.verify.trials,
                'kernel_tol': self.verify.kernel_tol,
                'dense_oracle': self.verify.dense_oracle
            },
            'thresholds': dict(self.thresholds)
        }


class _Locator:
    """Maps key paths of a JSON document to 1-based line numbers."""

    def __init__(self, text: str, source: Optional[str]):
        self.lines = text.splitlines()
        self.source = source

    def line_of(self, path: Sequence[str]) -> Optional[int]:
        line_index = 0
        found = None
        for key in path:
            needle = f'"{key}"'
            for i in range(line_index, len(self.lines)):
                if needle in self.lines[i]:
                    found = i
                    line_index = i
                    break
            else:
                return None if found is None else found + 1
        return None if found is None else found + 1

    def error(self, path: Sequence[str], message: str) -> ConfigValidationError:
        return ConfigValidationError(message, self.line_of(path), ".".join(path), self.source)


def _require(condition: bool, locator: _Locator, path: Sequence[str], message: str) -> None:
    if not condition:
        raise locator.error(path, message)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _int_triple(data: Dict[str, Any], key: str, locator: _Locator, path: List[str]) -> Tuple[int, int, int]:
    value = data.get(key)
    _require(isinstance(value, list) and len(value) == 3 and all(_is_int(v) for v in value),
             locator, path, "expected a list of three integers")
    return tuple(value)


def _factor(data: Any, locator: _Locator, path: List[str]) -> Optional[ConformalFactor]:
    if data is None:
        return None
    _require(isinstance(data, dict) and _is_real(data.get('offset')), locator, path,
             "expected an object with a numeric 'offset'")
    terms = data.get('terms', [])
    _require(isinstance(terms, list), locator, path + ['terms'], "expected a list")
    for term in terms:
        _require(isinstance(term, dict) and _is_real(term.get('amplitude'))
                 and _is_real(term.get('phase', 0.0)), locator, path + ['terms'],
                 "each term needs numeric 'amplitude' and optional 'phase'")
        _int_triple(term, 'm', locator, path + ['terms', 'm'])
    try:
        return ConformalFactor.from_dict(data)
    except InvariantViolationError as e:
        raise locator.error(path, str(e)) from e


def _section(raw: Dict[str, Any], key: str, locator: _Locator) -> Dict[str, Any]:
    value = raw.get(key, {})
    _require(isinstance(value, dict), locator, [key], "expected an object")
    return value


def parse_job_config(text: str, source: Optional[str] = None) -> JobConfig:
    """
    Validate a JSON job document.

    Args:
        text: JSON text
        source: File name used in error messages

    Returns:
        JobConfig

    Raises:
        ConfigValidationError: on the first invalid value, with its line
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigValidationError(f"invalid JSON: {e.msg}", e.lineno, None, source) from e

    locator = _Locator(text, source)
    _require(isinstance(raw, dict), locator, [], "top level must be an object")

    # Geometry
    lattice_data = _section(raw, 'lattice', locator)
    basis = lattice_data.get('basis', [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0])
    _require(isinstance(basis, list) and len(basis) == 9 and all(_is_real(v) for v in basis),
             locator, ['lattice', 'basis'], "expected 9 reals in row-major order")
    try:
        lattice = Lattice.from_row_major(basis)
    except InvariantViolationError as e:
        raise locator.error(['lattice', 'basis'], str(e)) from e

    spin_data = _section(raw, 'spin', locator)
    eps = _int_triple({'eps': spin_data.get('eps', [0, 0, 0])}, 'eps', locator, ['spin', 'eps'])
    try:
        spin = SpinStructure(eps)
    except InvariantViolationError as e:
        raise locator.error(['spin', 'eps'], str(e)) from e

    _require('grid' in raw, locator, ['grid'], "missing grid")
    grid_data = _section(raw, 'grid', locator)
    n = _int_triple(grid_data, 'n', locator, ['grid', 'n'])
    try:
        grid = Grid(n)
    except InvariantViolationError as e:
        raise locator.error(['grid', 'n'], str(e)) from e

    conformal = _factor(raw.get('conformal'), locator, ['conformal'])
    if conformal is not None:
        try:
            conformal.check_admissible(grid)
        except InvariantViolationError as e:
            raise locator.error(['conformal'], str(e)) from e
    rescale = _factor(raw.get('rescale'), locator, ['rescale'])
    if rescale is not None:
        try:
            rescale.check_admissible(grid)
        except InvariantViolationError as e:
            raise locator.error(['rescale'], str(e)) from e

    # Solver
    solver_data = _section(raw, 'solver', locator)
    defaults = config.get_solver_defaults()
    count = solver_data.get('count', defaults['count'])
    tol = solver_data.get('tol', defaults['tol'])
    max_iter = solver_data.get('max_iter', defaults['max_iter'])
    seed = solver_data.get('seed', defaults['seed'])
    _require(_is_int(count) and 1 <= count <= grid.dimension, locator, ['solver', 'count'],
             f"expected an integer in [1, {grid.dimension}]")
    _require(_is_real(tol) and tol > 0, locator, ['solver', 'tol'], "expected a positive number")
    _require(_is_int(max_iter) and max_iter >= 1, locator, ['solver', 'max_iter'], "expected a positive integer")
    _require(_is_int(seed) and seed >= 0, locator, ['solver', 'seed'], "expected a non-negative integer")
    solver = SolverSettings(count, float(tol), max_iter, seed)

    # Framing
    framing_data = _section(raw, 'framing', locator)
    source_kind = framing_data.get('source', 'eigenpair')
    _require(source_kind in FRAMING_SOURCES, locator, ['framing', 'source'], f"expected one of {FRAMING_SOURCES}")
    index = framing_data.get('index')
    _require(index is None or (_is_int(index) and 0 <= index < count), locator, ['framing', 'index'],
             f"expected null or an integer in [0, {count})")
    k_index = _int_triple({'k_index': framing_data.get('k_index', [1, 0, 0])}, 'k_index', locator,
                          ['framing', 'k_index'])
    sign = framing_data.get('sign', 1)
    _require(sign in (1, -1) and _is_int(sign), locator, ['framing', 'sign'], "expected 1 or -1")
    framing = FramingSelection(source_kind, index, k_index, sign)

    # Verification
    verify_data = _section(raw, 'verify', locator)
    trials = verify_data.get('trials', config.COMMUTATION_TRIALS)
    kernel_tol = verify_data.get('kernel_tol', config.KERNEL_TOL)
    dense_oracle = verify_data.get('dense_oracle', False)
    _require(_is_int(trials) and trials >= 1, locator, ['verify', 'trials'], "expected a positive integer")
    _require(_is_real(kernel_tol) and kernel_tol > 0, locator, ['verify', 'kernel_tol'], "expected a positive number")
    _require(isinstance(dense_oracle, bool), locator, ['verify', 'dense_oracle'], "expected true or false")
    verify = VerifySettings(trials, float(kernel_tol), dense_oracle)

    thresholds_data = _section(raw, 'thresholds', locator)
    for key, value in thresholds_data.items():
        _require(key in THRESHOLD_KEYS, locator, ['thresholds', key], f"unknown threshold; expected {THRESHOLD_KEYS}")
        _require(_is_real(value) and value > 0, locator, ['thresholds', key], "expected a positive number")
    thresholds = {key: float(value) for key, value in thresholds_data.items()}

    # Output
    output_data = _section(raw, 'output', locator)
    out_dir = output_data.get('dir', str(config.output_dir))
    prefix = output_data.get('prefix', 'spinframe')
    formats = output_data.get('formats', list(EXPORT_FORMATS))
    _require(isinstance(out_dir, str) and out_dir, locator, ['output', 'dir'], "expected a path")
    _require(isinstance(prefix, str) and prefix and '/' not in prefix, locator, ['output', 'prefix'],
             "expected a file name prefix")
    _require(isinstance(formats, list) and formats and all(f in EXPORT_FORMATS for f in formats),
             locator, ['output', 'formats'], f"expected a non-empty subset of {EXPORT_FORMATS}")
    output = OutputSettings(Path(out_dir), prefix, tuple(formats))

    export_data = _section(raw, 'export', locator)
    bundles = export_data.get('bundles', ['framing'])
    _require(isinstance(bundles, list) and bundles and all(b in ('framing', 'spectrum') for b in bundles),
             locator, ['export', 'bundles'], "expected a non-empty subset of ['framing', 'spectrum']")

    job = JobConfig(lattice, spin, grid, conformal, rescale, solver, framing, verify, thresholds, output,
                    tuple(bundles), source)
    logger.debug(f"Job config validated: grid={grid.n}, eps={spin.eps}, conformal={conformal is not None}")
    return job


def load_job_config(path: str) -> JobConfig:
    """
    Load and validate a job configuration file.

    Raises:
        ConfigValidationError: if the file is missing or invalid
    """
    file_path = Path(path)
    try:
        text = file_path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigValidationError(f"cannot read config file: {e.strerror}", None, None, str(file_path)) from e
    return parse_job_config(text, str(file_path))
