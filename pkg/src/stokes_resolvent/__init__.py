"""Resolvent and analytic-semigroup solver for the linearised compressible
Stokes system in the half space with Dirichlet boundary condition.

The package is organised bottom-up:

- ``spectral_core``: parameters, the admissible lambda region, the
  characteristic roots A, B and the boundary-layer kernels;
- ``grid_fourier``: tangential FFT / Chebyshev normal grids and fields;
- ``besov``: Littlewood-Paley blocks and Besov norms;
- ``resolvent_wholespace`` / ``resolvent_halfspace``: the resolvent
  solution operators;
- ``semigroup``: contour-integral evolution and the L1-in-time integral;
- ``verify``: oracles, audits and sweeps;  ``cli``: the command line.
"""

from .besov import BesovParams, besov_norm, besov_norm_halfspace
from .grid_fourier import Field, HalfGrid, NormalGrid, TangentialGrid, WholeField, WholeGrid
from .resolvent_halfspace import HalfspaceSolver, ResolventSolution, solve_resolvent, split_operators
from .resolvent_wholespace import apply_dS0, apply_S0
from .semigroup import (
    ContourSpec,
    EvolutionState,
    apply_T,
    build_contour,
    evolve_many,
    l1_maximal_integral,
)
from .spectral_core import FluidParams, SectorSpec, admissibility_thresholds, in_sector, roots

__version__ = "0.1.0"

__all__ = [
    "BesovParams",
    "besov_norm",
    "besov_norm_halfspace",
    "Field",
    "HalfGrid",
    "NormalGrid",
    "TangentialGrid",
    "WholeField",
    "WholeGrid",
    "HalfspaceSolver",
    "ResolventSolution",
    "solve_resolvent",
    "split_operators",
    "apply_S0",
    "apply_dS0",
    "ContourSpec",
    "EvolutionState",
    "apply_T",
    "build_contour",
    "evolve_many",
    "l1_maximal_integral",
    "FluidParams",
    "SectorSpec",
    "admissibility_thresholds",
    "in_sector",
    "roots",
]
