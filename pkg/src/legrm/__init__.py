"""Single-leg revenue management: relaxed bounds, discrete pricing, EMSRb policies and simulation."""
from .errors import (ConvergenceError, InfeasibleError, LegrmError, NoDemandError, PolicyError,
                     ScenarioParseError, ScenarioValidationError, SearchBudgetExceeded, ShapeMismatchError)
from .scenario import (PRESETS, DemandCell, GeneratorSpec, Product, Scenario, Violation, demand_summary,
                       dump_scenario, generate_synthetic, load_scenario, make_scenario, read_scenario,
                       validate_scenario)
from .demand import DemandCurve, curve_from_frat5, expected_demand, survival_probability, wtp_distribution
from .relaxed import DualSolution, relaxed_bound, solve_dual, solve_relaxed
from .discrete import PricingPlan, SearchConfig, exact_optimize, greedy_optimize, plan_stats
from .policies import (FareClass, NestedPolicy, classic_emsrb_policy, emsrb_policy, littlewood_protection,
                       mr_transform, mrt_emsrb_policy)
from .simulator import (ArrivalEvent, MonteCarloResult, SimulationOutcome, monte_carlo, simulate_fixed_prices,
                        simulate_greedy_rolling, simulate_policy)

__version__ = "0.1.0"
