"""Exact linear programming from approximate solves, steered by circuit imbalance."""
from .errors import InternalInconsistency, ParseError, ProxLPError, RestartLimit
from .feasibility import FeasConfig, solve_feasibility, verify_feas_lp
from .instances import Instance, make_instance, parse_instance
from .optimization import OptConfig, inner_loop, optimize, solve_optimization
from .outcomes import (FarkasDual, FarkasPrimal, Feasible, Lifting, Optimal, PerturbedOptimum,
                       Trace)
from .subspace import LiftingCertificate, Subspace

__all__ = ["Subspace", "LiftingCertificate", "solve_feasibility", "verify_feas_lp", "optimize",
           "solve_optimization", "inner_loop", "FeasConfig", "OptConfig", "Instance",
           "make_instance", "parse_instance", "Feasible", "Optimal", "PerturbedOptimum",
           "FarkasPrimal", "FarkasDual", "Lifting", "Trace", "ProxLPError", "ParseError",
           "RestartLimit", "InternalInconsistency"]
__version__ = "0.1.0"
