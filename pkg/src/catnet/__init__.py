"""catnet: coupled catastrophe networks.

Simulation and analysis of networks of elementary catastrophes driven
by stochastic control trajectories: equilibrium tracking, synchronized
basin-reconfiguration (cascade) detection, near-singularity diagnostics,
and copula-based dependence statistics over event ensembles.
"""

from ._kernels import BACKEND
from .forms import (CriticalPointClass, NormalForm, PointKind, SectorPoint,
                    classify, critical_points, cusp_discriminant, gradient,
                    hessian, potential)
from .network import (CouplingSpec, FoldSignal, NetworkEquilibrium,
                      NetworkSystem, continue_equilibrium, find_equilibria,
                      network_gradient, network_hessian, network_potential)
from .paths import (ControlPath, ControlPathSpec, Diffusion, Ramp,
                    ellipticity_check, replicate_seed, simulate_path,
                    splitmix64)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ControlPath",
    "ControlPathSpec",
    "CouplingSpec",
    "CriticalPointClass",
    "Diffusion",
    "FoldSignal",
    "NetworkEquilibrium",
    "NetworkSystem",
    "NormalForm",
    "PointKind",
    "Ramp",
    "SectorPoint",
    "classify",
    "continue_equilibrium",
    "critical_points",
    "cusp_discriminant",
    "ellipticity_check",
    "find_equilibria",
    "gradient",
    "hessian",
    "network_gradient",
    "network_hessian",
    "network_potential",
    "potential",
    "replicate_seed",
    "simulate_path",
    "splitmix64",
]
