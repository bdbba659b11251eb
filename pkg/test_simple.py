# -*- coding: utf-8 -*-
"""
Simple script to verify environment setup.
"""

import sys

import numpy as np
import pandas as pd
import scipy

from src import __version__
from src.business.dirac_service import DiracService
from src.data.data_models import Grid, Lattice, SpinStructure


print(f"spinframe {__version__} - environment check")
print(f"python {sys.version.split()[0]}, numpy {np.__version__}, scipy {scipy.__version__}, pandas {pd.__version__}")

# e^{2πix}(0,1) is an eigenspinor with eigenvalue 2π
service = DiracService()
lattice, spin, grid = Lattice.cubic(), SpinStructure((0, 0, 0)), Grid((4, 4, 4))
eigenvalue, field = service.plane_wave_eigenspinor(lattice, spin, grid, (1, 0, 0), 1)
residual = np.max(np.abs(service.flat_dirac_apply(field, lattice, spin).data - eigenvalue * field.data))

print(f"plane wave eigenvalue {eigenvalue:.12f}, residual {residual:.3e}")
if residual > 1e-12:
    print("FFT backend check failed")
    sys.exit(1)
print("OK: environment is working")
