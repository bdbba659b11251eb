# -*- coding: utf-8 -*-
"""
Command implementations for the spinframe CLI.
Each command turns a validated JobConfig into files and a JSON report.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional
import logging

import numpy as np

from src.business.dirac_service import DiracService
from src.business.framing_service import FramingService
from src.business.verification_service import VerificationService
from src.data.data_models import Cluster, EigenPair, Framing, Grid, Lattice, SpinFrameError
from src.data.field_io import FieldIO
from src.utils.config import config
from src.utils.validators import ConfigValidationError, JobConfig


COMMANDS = ('spectrum', 'framing', 'verify', 'export')


@dataclass
class CommandResult:
    """Outcome of one command: its report and whether every threshold held."""

    command: str
    report: Dict[str, Any]
    passed: bool
    files: List[str] = field(default_factory=list)


class JobCommands:
    """
    Runs the CLI subcommands against shared services.
    Reports only hold values that are deterministic for a config and seed.
    """

    def __init__(self, dirac_service: Optional[DiracService] = None):
        """Initialize command runner."""
        self.dirac_service = dirac_service or DiracService()
        self.framing_service = FramingService(self.dirac_service)
        self.verification_service = VerificationService(self.dirac_service)
        self.logger = logging.getLogger(__name__)

    def run(self, command: str, job: JobConfig, field_io: FieldIO) -> CommandResult:
        """
        Dispatch a subcommand.

        Args:
            command: One of COMMANDS
            job: Validated job configuration
            field_io: Writer bound to the job's output directory

        Returns:
            CommandResult with the report already written
        """
        handlers = {
            'spectrum': self.cmd_spectrum,
            'framing': self.cmd_framing,
            'verify': self.cmd_verify,
            'export': self.cmd_export
        }
        if command not in handlers:
            raise ConfigValidationError(f"unknown command '{command}'; expected one of {COMMANDS}")
        self.logger.info(f"Running '{command}' for grid {job.grid.n}, eps={job.spin.eps}")
        result = handlers[command](job, field_io)
        report_path = field_io.write_report(f"{job.output.prefix}_{command}", result.report)
        result.files.insert(0, str(report_path))
        return result

    # Spectrum

    def _eigenpairs(self, job: JobConfig) -> List[EigenPair]:
        return self.dirac_service.eigensolve(
            job.spec, job.solver.count, tol=job.solver.tol, seed=job.solver.seed, max_iter=job.solver.max_iter
        )

    def _complete_clusters(self, job: JobConfig, pairs: List[EigenPair], clusters: List[Cluster]) -> List[Cluster]:
        # Groups at the largest computed |λ| may extend past solver.count
        cut = None if len(pairs) >= job.grid.dimension else max(abs(p.eigenvalue) for p in pairs)
        return self.verification_service.complete_clusters(clusters, cut)

    def _oracle_table(self, job: JobConfig, pairs: List[EigenPair]) -> Dict[str, Any]:
        largest = max(abs(p.eigenvalue) for p in pairs)
        lambda_max = largest * (1.0 + 1e-6) + 1e-6
        clusters = self.dirac_service.flat_spectrum_oracle(job.lattice, job.spin, lambda_max)
        oracle_values = np.array([c.lambda_mean for c in clusters])
        computed = np.array([p.eigenvalue for p in pairs])
        deviations = [float(np.min(np.abs(oracle_values - value))) for value in computed]
        match_tol = max(job.solver.tol, 1e-6 * max(1.0, largest))
        rows = [
            {
                'lambda': c.lambda_mean,
                'oracle_multiplicity': c.multiplicity,
                'computed_multiplicity': int(np.sum(np.abs(computed - c.lambda_mean) <= match_tol))
            }
            for c in clusters
        ]
        return {'rows': rows, 'max_deviation': max(deviations)}

    def cmd_spectrum(self, job: JobConfig, field_io: FieldIO) -> CommandResult:
        """Eigenvalues, residuals, clusters, evenness and (flat) the oracle comparison."""
        pairs = self._eigenpairs(job)
        clusters = self.dirac_service.cluster_multiplicities(pairs, config.CLUSTER_GAP_TOL, relative=True)
        max_residual = max(p.residual for p in pairs)
        report: Dict[str, Any] = {
            'command': 'spectrum',
            'job': job.to_dict(),
            'eigenpairs': [p.to_dict() for p in pairs],
            'clusters': [
                {'lambda_mean': c.lambda_mean, 'multiplicity': c.multiplicity, 'simple_over_h': c.simple_over_h}
                for c in clusters
            ],
            'evenness': self.verification_service.evenness_check(self._complete_clusters(job, pairs, clusters)),
            'max_residual': max_residual,
            'min_abs_eigenvalue': min(abs(p.eigenvalue) for p in pairs),
            'genericity': self.verification_service.genericity_report(pairs, clusters)
        }
        if job.spec.is_flat:
            report['oracle'] = self._oracle_table(job, pairs)
        if job.verify.dense_oracle:
            dense = np.array(self.dirac_service.dense_spectrum(job.spec))
            report['dense_oracle_max_deviation'] = max(
                float(np.min(np.abs(dense - p.eigenvalue))) for p in pairs
            )

        bundle = field_io.save_bundle(f"{job.output.prefix}_spectrum", {
            'eigenvalues': np.array([p.eigenvalue for p in pairs]),
            'fields': np.array([p.field.data for p in pairs]),
            'basis': job.lattice.matrix,
            'n': np.array(job.grid.n)
        })
        passed = max_residual <= job.solver.tol
        return CommandResult('spectrum', report, passed, [str(bundle)])

    # Framing

    def _select_pair(self, job: JobConfig, pairs: List[EigenPair]) -> EigenPair:
        if job.framing.index is not None:
            return pairs[job.framing.index]
        positive = [p for p in pairs if p.eigenvalue >= config.KERNEL_TOL]
        if not positive:
            raise SpinFrameError(
                f"No positive eigenvalue among the {len(pairs)} computed pairs; increase solver.count"
            )
        return positive[0]

    def _build_framing(self, job: JobConfig) -> Framing:
        if job.framing.source == 'plane_wave':
            if job.conformal is not None:
                raise ConfigValidationError("plane_wave source requires a flat metric", key='framing.source',
                                            source=job.source)
            return self.framing_service.framing_from_plane_wave(
                job.lattice, job.spin, job.grid, job.framing.k_index, job.framing.sign
            )
        pair = self._select_pair(job, self._eigenpairs(job))
        return self.framing_service.framing_from_eigenpair(pair, job.spec)

    def cmd_framing(self, job: JobConfig, field_io: FieldIO) -> CommandResult:
        """Framing fields plus their report; rescaled when the job names a target factor."""
        framing = self._build_framing(job)
        if job.rescale is not None:
            framing = self.framing_service.conformal_rescale(framing, job.rescale)
        framing_report = self.verification_service.framing_report(framing, job.thresholds)

        report = {
            'command': 'framing',
            'job': job.to_dict(),
            'provenance': framing.provenance,
            'report': framing_report.to_dict(),
            'min_pointwise_norm': self.framing_service.min_pointwise_norm(framing),
            'warnings': list(framing.provenance.get('warnings', []))
        }
        arrays = {
            'X1': framing.x1.data,
            'X2': framing.x2.data,
            'X3': framing.x3.data,
            'metric_h': framing.metric_samples(),
            'basis': framing.lattice.matrix,
            'n': np.array(framing.grid.n)
        }
        bundle = field_io.save_bundle(f"{job.output.prefix}_framing", arrays)
        files = [str(bundle)] + self._export_framing(job, field_io, arrays)
        return CommandResult('framing', report, framing_report.passed, files)

    # Verify

    def cmd_verify(self, job: JobConfig, field_io: FieldIO) -> CommandResult:
        """Run the invariant suite; passes iff every check passes."""
        spec = job.spec
        trials = job.verify.trials
        checks: Dict[str, Dict[str, Any]] = {}

        commutation = self.verification_service.quaternionic_commutation_check(spec, trials, job.solver.seed)
        checks['quaternionic_commutation'] = {
            'value': commutation, 'threshold': config.COMMUTATION_TOL, 'passed': commutation <= config.COMMUTATION_TOL
        }
        symmetry = self.verification_service.symmetry_defect(spec, trials, job.solver.seed)
        checks['symmetry'] = {
            'value': symmetry, 'threshold': config.COMMUTATION_TOL, 'passed': symmetry <= config.COMMUTATION_TOL
        }

        pairs = self._eigenpairs(job)
        clusters = self.dirac_service.cluster_multiplicities(pairs, config.CLUSTER_GAP_TOL, relative=True)
        complete = self._complete_clusters(job, pairs, clusters)
        checks['evenness'] = {
            'multiplicities': [c.multiplicity for c in clusters],
            'clusters_at_cut': len(clusters) - len(complete),
            'passed': self.verification_service.evenness_check(complete)
        }

        kernel = self.verification_service.kernel_dimension(
            spec, job.verify.kernel_tol, seed=job.solver.seed, max_iter=job.solver.max_iter
        )
        expected = 2 if job.spin.is_periodic else 0
        checks['kernel_dimension'] = {'value': kernel, 'expected': expected, 'passed': kernel == expected}

        dense_feasible = job.grid.dimension <= config.DENSE_MAX_DIMENSION
        if job.verify.dense_oracle or dense_feasible:
            deviation = self.verification_service.oracle_equivalence(spec)
            checks['oracle_equivalence'] = {
                'value': deviation, 'threshold': config.DENSE_ORACLE_TOL, 'passed': deviation <= config.DENSE_ORACLE_TOL
            }
        else:
            checks['oracle_equivalence'] = {'skipped': f"dimension {job.grid.dimension} above dense limit",
                                            'passed': True}

        passed = all(check['passed'] for check in checks.values())
        report = {'command': 'verify', 'job': job.to_dict(), 'checks': checks, 'passed': passed}
        return CommandResult('verify', report, passed)

    # Export

    def _export_framing(self, job: JobConfig, field_io: FieldIO, arrays: Dict[str, np.ndarray]) -> List[str]:
        grid = Grid(tuple(int(v) for v in arrays['n']))
        lattice = Lattice(tuple(tuple(row) for row in np.asarray(arrays['basis']).tolist()))
        vectors = {name: arrays[name] for name in ('X1', 'X2', 'X3')}
        name = f"{job.output.prefix}_framing"
        files = []
        if 'csv' in job.output.formats:
            frame = field_io.field_frame(grid, lattice, vectors=vectors)
            files.append(str(field_io.write_csv(f"{name}.csv", frame)))
        if 'vtk' in job.output.formats:
            files.append(str(field_io.write_vtk(f"{name}.vtk", grid, lattice, "spinframe framing",
                                                vectors=vectors, scalars={'metric_h': arrays['metric_h']})))
        return files

    def _export_spectrum(self, job: JobConfig, field_io: FieldIO, arrays: Dict[str, np.ndarray]) -> List[str]:
        grid = Grid(tuple(int(v) for v in arrays['n']))
        lattice = Lattice(tuple(tuple(row) for row in np.asarray(arrays['basis']).tolist()))
        spinors = {f"phi{i}": data for i, data in enumerate(arrays['fields'])}
        name = f"{job.output.prefix}_spectrum"
        files = []
        if 'csv' in job.output.formats:
            frame = field_io.field_frame(grid, lattice, spinors=spinors)
            files.append(str(field_io.write_csv(f"{name}.csv", frame)))
        if 'vtk' in job.output.formats:
            scalars = {}
            for label, data in spinors.items():
                scalars[f"{label}_alpha_re"] = data[0].real
                scalars[f"{label}_alpha_im"] = data[0].imag
                scalars[f"{label}_beta_re"] = data[1].real
                scalars[f"{label}_beta_im"] = data[1].imag
            files.append(str(field_io.write_vtk(f"{name}.vtk", grid, lattice, "spinframe eigenspinors",
                                                scalars=scalars)))
        return files

    def cmd_export(self, job: JobConfig, field_io: FieldIO) -> CommandResult:
        """Re-emit saved field bundles as CSV and VTK."""
        exporters = {'framing': self._export_framing, 'spectrum': self._export_spectrum}
        files: List[str] = []
        for bundle in job.export_bundles:
            arrays = field_io.load_bundle(f"{job.output.prefix}_{bundle}")
            files.extend(exporters[bundle](job, field_io, arrays))
        names = sorted(Path(f).name for f in files)
        report = {'command': 'export', 'bundles': list(job.export_bundles), 'files': names}
        return CommandResult('export', report, True, files)

