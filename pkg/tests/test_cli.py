# -*- coding: utf-8 -*-
"""
End-to-end runs of the command-line entry point.
"""

import json

import pytest

from app import EXIT_SOLVER, EXIT_SUCCESS, EXIT_THRESHOLD, EXIT_VALIDATION, main


def write_job(tmp_path, name='job.json', **sections):
    document = {'grid': {'n': [4, 4, 4]}}
    document.update(sections)
    path = tmp_path / name
    path.write_text(json.dumps(document, indent=2))
    return str(path)


def read_error(out_dir):
    return json.loads((out_dir / 'error.json').read_text())['error']


class TestExitCodes:

    def test_odd_grid_is_a_validation_error(self, tmp_path, capsys):
        path = tmp_path / 'job.json'
        path.write_text('{\n  "grid": {"n": [4, 5, 4]}\n}\n')
        out = tmp_path / 'out'
        assert main(['spectrum', '--config', str(path), '--out', str(out)]) == EXIT_VALIDATION
        error = read_error(out)
        assert error['type'] == 'ConfigValidationError'
        assert error['line'] == 2
        assert 'grid dimensions must be even' in error['message']
        assert '"exit_code": 2' in capsys.readouterr().out

    def test_plane_wave_framing_passes(self, tmp_path, capsys):
        out = tmp_path / 'out'
        config_path = write_job(tmp_path, grid={'n': [8, 8, 8]},
                                framing={'source': 'plane_wave', 'k_index': [1, 0, 0], 'sign': 1})
        assert main(['framing', '--config', config_path, '--out', str(out)]) == EXIT_SUCCESS
        report = json.loads((out / 'spinframe_framing.json').read_text())
        assert report['report']['passed']
        assert report['min_pointwise_norm'] == pytest.approx(0.5)
        assert (out / 'spinframe_framing.csv').exists()
        assert (out / 'spinframe_framing.vtk').exists()
        assert (out / 'spinframe_framing.meta.json').exists()
        assert 'spinframe framing: PASSED' in capsys.readouterr().out

    def test_rescaled_plane_wave_is_held_to_flat_limits(self, tmp_path):
        out = tmp_path / 'out'
        config_path = write_job(
            tmp_path,
            grid={'n': [8, 8, 8]},
            rescale={'offset': 1.3, 'terms': [{'m': [0, 1, 0], 'amplitude': 0.25, 'phase': -1.5707963267948966}]},
            framing={'source': 'plane_wave', 'k_index': [1, 0, 0], 'sign': 1}
        )
        assert main(['framing', '--config', config_path, '--out', str(out)]) == EXIT_SUCCESS
        report = json.loads((out / 'spinframe_framing.json').read_text())
        assert report['provenance']['path'] == 'rescaled'
        assert report['report']['thresholds']['divergence'] == 1e-10
        assert report['report']['max_divergence'] <= 1e-10

    def test_plane_wave_needs_flat_metric(self, tmp_path):
        out = tmp_path / 'out'
        config_path = write_job(
            tmp_path,
            grid={'n': [8, 8, 8]},
            conformal={'offset': 1.5, 'terms': [{'m': [1, 0, 0], 'amplitude': 0.4}]},
            framing={'source': 'plane_wave'}
        )
        assert main(['framing', '--config', config_path, '--out', str(out)]) == EXIT_VALIDATION

    def test_verify_passes_on_flat_torus(self, tmp_path):
        out = tmp_path / 'out'
        assert main(['verify', '--config', write_job(tmp_path), '--out', str(out)]) == EXIT_SUCCESS
        checks = json.loads((out / 'spinframe_verify.json').read_text())['checks']
        assert checks['kernel_dimension']['value'] == 2
        assert checks['evenness']['multiplicities'] == [6, 2, 6]
        assert checks['oracle_equivalence']['passed']

    def test_verify_twisted_with_default_count(self, tmp_path):
        # 14 pairs end inside the 16-fold |λ| = 2π·√(5/4) group
        out = tmp_path / 'out'
        config_path = write_job(tmp_path, grid={'n': [8, 8, 8]}, spin={'eps': [1, 0, 0]})
        assert main(['verify', '--config', config_path, '--out', str(out)]) == EXIT_SUCCESS
        checks = json.loads((out / 'spinframe_verify.json').read_text())['checks']
        assert checks['evenness']['passed']
        assert sum(checks['evenness']['multiplicities']) == 14
        assert checks['evenness']['clusters_at_cut'] == 2
        assert checks['kernel_dimension']['value'] == 0

    def test_solver_non_convergence(self, tmp_path):
        out = tmp_path / 'out'
        config_path = write_job(tmp_path, solver={'count': 4, 'max_iter': 1})
        assert main(['spectrum', '--config', config_path, '--out', str(out)]) == EXIT_SOLVER
        error = read_error(out)
        assert error['iterations'] == 1
        assert len(error['residuals']) == 4

    def test_no_positive_eigenvalue(self, tmp_path):
        out = tmp_path / 'out'
        config_path = write_job(tmp_path, solver={'count': 2})
        assert main(['framing', '--config', config_path, '--out', str(out)]) == EXIT_THRESHOLD
        assert 'increase solver.count' in read_error(out)['message']

    def test_dense_oracle_above_limit(self, tmp_path):
        out = tmp_path / 'out'
        config_path = write_job(tmp_path, grid={'n': [8, 8, 8]}, solver={'count': 4})
        code = main(['spectrum', '--config', config_path, '--out', str(out), '--dense-oracle'])
        assert code == EXIT_VALIDATION
        assert read_error(out)['type'] == 'DenseOracleLimitError'

    def test_export_without_bundle(self, tmp_path):
        out = tmp_path / 'out'
        assert main(['export', '--config', write_job(tmp_path), '--out', str(out)]) == EXIT_THRESHOLD
        assert read_error(out)['type'] == 'FieldIOError'


class TestOutputs:

    def test_spectrum_then_export(self, tmp_path):
        out = tmp_path / 'out'
        config_path = write_job(tmp_path, spin={'eps': [1, 0, 0]}, solver={'count': 4},
                                export={'bundles': ['spectrum']}, output={'formats': ['csv']})
        assert main(['spectrum', '--config', config_path, '--out', str(out)]) == EXIT_SUCCESS
        report = json.loads((out / 'spinframe_spectrum.json').read_text())
        assert [c['multiplicity'] for c in report['clusters']] == [2, 2]
        assert report['oracle']['max_deviation'] < 1e-8
        assert report['evenness']

        assert main(['export', '--config', config_path, '--out', str(out)]) == EXIT_SUCCESS
        exported = json.loads((out / 'spinframe_export.json').read_text())
        assert exported['files'] == ['spinframe_spectrum.csv']
        lines = (out / 'spinframe_spectrum.csv').read_text().splitlines()
        assert len(lines) == 65
        assert lines[0].startswith('x,y,z,phi0_alpha_re')

    def test_reports_are_deterministic(self, tmp_path):
        config_path = write_job(tmp_path, spin={'eps': [0, 1, 0]},
                                framing={'source': 'plane_wave', 'k_index': [0, -1, 0], 'sign': -1})
        first, second = tmp_path / 'first', tmp_path / 'second'
        assert main(['framing', '--config', config_path, '--out', str(first)]) == EXIT_SUCCESS
        assert main(['framing', '--config', config_path, '--out', str(second)]) == EXIT_SUCCESS
        for name in ('spinframe_framing.json', 'spinframe_framing.csv', 'spinframe_framing.vtk'):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_seed_override_is_recorded(self, tmp_path):
        out = tmp_path / 'out'
        config_path = write_job(tmp_path, spin={'eps': [1, 1, 0]}, solver={'count': 8})
        assert main(['spectrum', '--config', config_path, '--out', str(out), '--seed', '5']) == EXIT_SUCCESS
        report = json.loads((out / 'spinframe_spectrum.json').read_text())
        assert report['job']['solver']['seed'] == 5
