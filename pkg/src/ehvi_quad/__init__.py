"""Expected hypervolume improvement by Gauss-Hermite quadrature, Monte Carlo and closed form."""
from .ehvi import EhviEstimate, Method, ehvi_exact_2d, ehvi_gh, ehvi_mc, ehvi_reference
from .fronts import FrontSpec, RefPolicy, Shape, generate_front, load_front
from .gaussians import GaussianDensity, diag_only, random_correlated, random_independent
from .hypervolume import ParetoFrontSet, dominates, hv, hv_contribution, hv_improvement, improvement_batch
from .numerics import RngStream
from .quadrature import gh_grid, hermite_rule
from .stats import kendall_tau

__version__ = "0.1.0"
