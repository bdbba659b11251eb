# -*- coding: utf-8 -*-
"""
Configuration management module for spinframe.
Handles environment settings, numerical tolerances, and solver defaults.
"""

import os
from typing import Dict, Any
from pathlib import Path

from dotenv import load_dotenv


class Config:
    """Configuration manager for spinframe."""

    # Environment configurations
    ENVIRONMENTS = {
        'development': {
            'debug': True,
            'log_level': 'DEBUG',
            'cache_size_limit': 64
        },
        'production': {
            'debug': False,
            'log_level': 'INFO',
            'cache_size_limit': 256
        }
    }

    # Eigensolver settings
    SOLVER_TOL = 1e-8
    SOLVER_MAX_ITER = 500
    SOLVER_PADDING = 4  # extra block vectors, discarded after convergence
    SOLVER_SEED = 0

    # Dense oracle settings
    DENSE_MAX_DIMENSION = 432  # 2 * 6**3 complex dimensions
    DENSE_ORACLE_TOL = 1e-10
    HERMITICITY_TOL = 1e-12

    # Spectral bookkeeping
    CLUSTER_GAP_TOL = 1e-6  # relative
    KERNEL_TOL = 1e-8
    KERNEL_SOLVE_COUNT = 4

    # Framing report thresholds
    DIVERGENCE_TOL_FLAT = 1e-10
    DIVERGENCE_TOL_CONFORMAL = 1e-6
    ORTHOGONALITY_TOL = 1e-8
    LENGTH_SPREAD_TOL = 1e-8
    DEGENERACY_RATIO = 1e-10

    # Quaternionic symmetry checks
    COMMUTATION_TOL = 1e-12
    COMMUTATION_TRIALS = 10
    QUATERNION_UNIT_TOL = 1e-12

    # Export settings
    CSV_SIGNIFICANT_DIGITS = 17
    DEFAULT_OUTPUT_DIR = 'out'

    def __init__(self):
        """Initialize configuration with environment detection."""
        load_dotenv()
        self.environment = self._detect_environment()
        self.config = dict(self.ENVIRONMENTS[self.environment])
        self.output_dir = self._get_output_directory()

    def _detect_environment(self) -> str:
        """
        Detect current environment based on environment variables.

        Returns:
            Environment name ('development' or 'production')
        """
        env = os.getenv('SPINFRAME_ENVIRONMENT', 'development').lower()
        return env if env in self.ENVIRONMENTS else 'development'

    def _get_output_directory(self) -> Path:
        """
        Get default output directory path.

        Returns:
            Path to output directory
        """
        custom_output_dir = os.getenv('SPINFRAME_OUTPUT_DIR')
        if custom_output_dir:
            return Path(custom_output_dir)
        return Path(self.DEFAULT_OUTPUT_DIR)

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value.

        Args:
            key: Configuration key
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        return self.config.get(key, default)

    def is_debug(self) -> bool:
        """Check if debug mode is enabled."""
        return self.get('debug', False)

    def get_log_level(self) -> str:
        """Get logging level."""
        return os.getenv('SPINFRAME_LOG_LEVEL', self.get('log_level', 'INFO')).upper()

    def get_solver_defaults(self) -> Dict[str, Any]:
        """Get the default solver block used when a job config omits it."""
        return {
            'count': 14,
            'tol': self.SOLVER_TOL,
            'max_iter': self.SOLVER_MAX_ITER,
            'seed': self.SOLVER_SEED
        }

    def get_report_thresholds(self, conformal: bool) -> Dict[str, float]:
        """
        Get framing report thresholds.

        Args:
            conformal: Whether the framing comes from a conformal metric

        Returns:
            Dictionary with divergence, orthogonality and length-spread limits
        """
        if conformal:
            return {
                'divergence': self.DIVERGENCE_TOL_CONFORMAL,
                'orthogonality': self.ORTHOGONALITY_TOL,
                'length_spread': self.LENGTH_SPREAD_TOL
            }
        return {
            'divergence': self.DIVERGENCE_TOL_FLAT,
            'orthogonality': 1e-12,
            'length_spread': 1e-12
        }


# Create global config instance
config = Config()
