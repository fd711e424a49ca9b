"""Wave-packet dynamics of two trapped Rydberg ions near an engineered
conical intersection, with monotonically convergent field optimisation.

Lengths are in nm, times in us and energies in hbar/us inside the model;
control fields are always in V/m. Configuration files use SI units.
"""

from ._core import (
    ConfigError,
    DerivedGeometry,
    Grid2D,
    InternalModel,
    IoError,
    Mode,
    ModeError,
    ModelError,
    MonotonicityFault,
    NumericalBlowup,
    PhysicalParams,
    RunConfig,
    cmd_equilibrium,
    cmd_evolve,
    cmd_optimize,
    cmd_surfaces,
    crossing_count,
    derive_geometry,
    evolve,
    internal_model,
    load_config,
    make_grid,
    manifest,
    mixing_angle,
    optimize,
    parse_config,
    plateau_iteration,
    solve_X0,
    solve_z0,
    surfaces,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
