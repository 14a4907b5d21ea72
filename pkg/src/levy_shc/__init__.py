"""Small-time heat content of isotropic Lévy processes on smooth bounded domains."""

from .asymptotics import limit_constant, mean_sup_stable, predicted_heat_loss
from .catalogue import InvalidSpecError, LevyProcessSpec, brownian, eval_psi, inverse_psi, stable, truncate
from .geometry import Domain, annulus, ball
from .heat_content import estimate_Q, run_theorem_scan

__all__ = ["LevyProcessSpec", "InvalidSpecError", "brownian", "stable", "truncate", "eval_psi", "inverse_psi",
           "Domain", "ball", "annulus", "estimate_Q", "run_theorem_scan", "limit_constant", "mean_sup_stable",
           "predicted_heat_loss"]
