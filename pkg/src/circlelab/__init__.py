"""circlelab: numerical laboratory for parabolic dynamics on the circle.

Simulates u_t = u_xx + f(t, u, u_x) on the 2-pi-periodic circle under
recurrent (quasi-periodic) time forcing and provides executable diagnostics
for the structural theory of such flows: zero-number monotonicity of solution
differences, the rotation-orbit quotient geometry, phase reduction to a
forced circle flow, and Lyapunov dimension counts.
"""

__version__ = "0.1.0"

from .errors import (Blowup, CircleLabError, Degenerate, DegenerateField,
                     FlatField, InsufficientData, MismatchedTrajectories,
                     NearSingular, NonFinite, ParseError, UnwrapFailure,
                     ValidationError)
from .forcing import (HullPoint, Nonlinearity, QuasiPeriodicSignal,
                      appendix_nonlinearity, appendix_series, constant_signal,
                      eval_signal, hull_distance, integral_signal, nl_eval,
                      translate_signal)
from .spectral import (CircleGrid, Field, Trajectory, derivative, evolve,
                       evolve_linearized)
from .symmetry import (OrbitDistanceResult, PeriodReport, is_homogeneous,
                       orbit_distance, quotient_distance, shift,
                       spatial_period)
from .zeros import (ZeroCount, ZeroSeries, monitor_difference,
                    simple_zero_certificate, zero_number)
from .dynamics import (FiberReport, OmegaSample, classify_homogeneity,
                       fiber_multiplicity, proximality, recurrence_diagnostic,
                       sample_omega)
from .circleflow import (AlmostPeriodReport, PhaseTrack, almost_period_scan,
                         extract_phase, max_value, reduced_rhs,
                         verify_reduction)
from .spectrum import (SpectrumEstimate, TangentFrame, classify_spectrum,
                       lyapunov_exponents, mode_zero_bounds_check)
from .config import ScenarioConfig, parse_config, serialize_config
from .runner import run_scenario, verify_appendix

__all__ = [name for name in dir() if not name.startswith("_")]
