"""Lefschetz numbers of self-maps of model constant-curvature manifolds by
numerical integration of pulled-back Mathai-Quillen Thom forms, verified
against independent topological oracles."""

from .geometry import (GeodesicData, ManifoldPoint, ModelGeometry,
                       TangentVector, cut_margin, exp_map, geodesic_between,
                       log_map, parallel_transport, tube_membership)
from .integrand import (ABMatrices, RadialProfile, VHDecomposition,
                        ab_matrices, jacobi_decompose,
                        lefschetz_integrand_constcurv, lefschetz_integrand_flat,
                        profile_eval)
from .maps import (CirclePower, GenericChartMap, Identity, SmoothSelfMap,
                   SphereReflection, SphereRotation, SphereSuspension,
                   TorusLinear, parse_manifold, parse_map)
from .mqthom import (MQCoefficients, MultiIndex, fiber_integral,
                     mq_coefficients, pfaffian, pfaffian_sum_constcurv,
                     shuffle_sign)
from .oracles import (FixedPointRecord, FixedSubmanifold,
                      cohomological_lefschetz, euler_characteristic,
                      find_fixed_points, fixed_point_lefschetz_sum,
                      fixed_submanifold_sum, winding_index)
from .quadrature import (LefschetzReport, QuadratureGrid, build_grid,
                         compute_lefschetz, integrate_density,
                         localization_mass, sweep_t)
from .cutflow import (DeformedMap, TimeProfile, bound_check,
                      cut_set_estimate, degree_current_estimate,
                      sign_refinement_sphere, t_map)
from .bounds import (AlternatingForm, flat_bound, hodge_bound_flat_torus,
                     lemma_constants, norm_l2, norm_linf)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
