"""Shrinkage confidence sets for a multivariate normal mean: estimators,
region procedures, and coverage/volume evaluation."""

from .numkit import SeedSpec
from .regions import make_procedure
from .evaluate.montecarlo import mc_coverage, mc_curve
from .evaluate.quadrature import quad_coverage
from .evaluate.solvers import astar_solve, w_alpha_solve, w_alpha_taylor
from .selection import SelectionScenario, run_scenario

__all__ = ["SeedSpec", "make_procedure", "mc_coverage", "mc_curve", "quad_coverage", "astar_solve",
           "w_alpha_solve", "w_alpha_taylor", "SelectionScenario", "run_scenario"]
