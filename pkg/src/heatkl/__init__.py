"""Small-time expansion of the heat-kernel KL divergence on closed manifolds.

The KL divergence between the time-t heat kernel (started at a point, rate
Laplacian/2) and the uniform distribution expands as

    KL(t) = -(d/2) ln(2 pi t) + ln Vol + c0 + c1 t + c2 t^2 + O(t^3)

and this package computes c0, c1, c2 from pointwise curvature data in two
independent ways (closed-form contractions and Gaussian-moment integration
of the parametrix), plus exact spectral kernels on spheres, flat tori, and
their products for numeric validation.
"""

from ._series import BACKEND
from .errors import (AccuracyError, ConditioningError, ConsistencyError,
                     InvalidInputError, UnsupportedOrderError)
from .expansion import (ExpansionResult, build_P_Q, c0, c1, c2_closed,
                        c_i_via_wick, expansion_from_jet, kl_asymptotic)
from .manifolds import (REFERENCE_SPECS, FlatTorus, KernelEval, Product,
                        Sphere, curvature_jet, dimension, format_manifold,
                        heat_kernel, parse_manifold, sqrt_det_g_normal, volume)
from .numeric import (FitReport, QuadratureConfig, SweepRow, fit_coefficients,
                      kernel_mass, kl_numeric, parse_sweep_csv,
                      product_kl_tensor, render_sweep_csv, sweep)
from .parametrix import (ParametrixJet, parametrix_from_jet,
                         sqrt_det_g_taylor)
from .tensors import (CurvatureJet, constant_curvature_jet,
                      constant_curvature_riemann, direct_sum_jet, flat_jet,
                      load_jet, random_curvature_jet, ricci_from_riemann,
                      save_jet, scalar_from_ricci)
from .validate import CheckResult, run_checks
from .wick import (PolynomialY, contract2, contract4, integrate_polynomial,
                   isserlis_oracle, moment_1d, mu, nu, truncation_defect)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "BACKEND", "CheckResult", "ConditioningError",
    "ConsistencyError", "CurvatureJet", "ExpansionResult", "FitReport",
    "FlatTorus", "InvalidInputError", "KernelEval", "ParametrixJet",
    "PolynomialY", "Product", "QuadratureConfig", "REFERENCE_SPECS",
    "Sphere", "SweepRow", "UnsupportedOrderError", "build_P_Q", "c0", "c1",
    "c2_closed", "c_i_via_wick", "constant_curvature_jet",
    "constant_curvature_riemann", "contract2", "contract4", "curvature_jet",
    "dimension", "direct_sum_jet", "expansion_from_jet", "fit_coefficients",
    "flat_jet", "format_manifold", "heat_kernel", "integrate_polynomial",
    "isserlis_oracle", "kernel_mass", "kl_asymptotic", "kl_numeric",
    "load_jet", "moment_1d", "mu", "nu", "parametrix_from_jet",
    "parse_manifold", "parse_sweep_csv", "product_kl_tensor",
    "random_curvature_jet", "render_sweep_csv", "ricci_from_riemann",
    "run_checks", "save_jet", "scalar_from_ricci", "sqrt_det_g_normal",
    "sqrt_det_g_taylor", "sweep", "truncation_defect", "volume",
]
