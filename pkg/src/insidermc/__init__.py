"""Monte Carlo and quadrature toolkit comparing noise interpretations of insider portfolio SDEs."""

from .analytics import (
    OrderingVerdict,
    QuadratureError,
    WealthTable,
    closed_form_table,
    expected_honest,
    expected_honest_max,
    expected_insider,
    jump_probability,
    norm_cdf,
    ordering_monotone,
    quadrature_expectation,
    quadrature_table,
    verify_ordering,
)
from .functionals import (
    Affine,
    Indicator,
    IntegrandTerm,
    MonotoneSmooth,
    MonotonicityError,
    NonDifferentiableError,
    ProductIntegrand,
    Smooth,
    TerminalFunctional,
    arctangent,
    logistic,
    malliavin_trace_partial,
    wick_with_exponential,
)
from .harness import (
    ConjectureReport,
    ConvergenceTable,
    JumpReport,
    MCReport,
    NumericalError,
    conjecture_report,
    convergence_study,
    discontinuity_probe,
    estimate_expectation,
)
from .integrators import (
    Interpretation,
    WealthProcess,
    ak_integral,
    ak_residual,
    detect_indicator_flip,
    euler_forward,
    exact_solution,
    forward_integral,
    skorokhod_integral,
    skorokhod_via_correction,
    solution_integrand,
)
from .market import (
    FullInformation,
    Honest,
    MarketParams,
    PartialTrust,
    Strategy,
    initial_allocation,
    random_params,
    stock_functional,
    threshold,
    total_wealth,
)
from .paths import BrownianPath, TimeGrid, coarsen, generate_path, girsanov_shift

__version__ = "0.1.0"
