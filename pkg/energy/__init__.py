# energy package
# Discrete p-energies and p-moduli on horizontal networks, and their sweeps

from .solvers import (
    BoundaryValueProblem,
    EnergyResult,
    ModulusResult,
    duality_check,
    energy_eval,
    holder_constant,
    solve_energy,
    solve_modulus,
    transfer_F,
    transfer_G,
)
from .sweep import EnergySweep, energy_sweep, modulus_sweep, submultiplicativity

__all__ = [
    "BoundaryValueProblem",
    "EnergyResult",
    "ModulusResult",
    "duality_check",
    "energy_eval",
    "holder_constant",
    "solve_energy",
    "solve_modulus",
    "transfer_F",
    "transfer_G",
    "EnergySweep",
    "energy_sweep",
    "modulus_sweep",
    "submultiplicativity",
]
