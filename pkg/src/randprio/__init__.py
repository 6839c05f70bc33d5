"""Random Priority vs. optimal welfare: simulation and bound verification."""
from .analysis import (RatioEstimate, RatioNotion, TailReport, adversarial_search, avg_ratio,
                       berry_esseen_gap, empirical_tail)
from .bounds import (BoundConstants, lambda_iid, lambda_non_iid, tail_bound_iid,
                     tail_bound_non_iid, theorem2_finite_bound, theorem4_finite_bound)
from .core import (Allocation, BirkhoffDecomposition, Instance, Mode, birkhoff_decompose,
                   social_welfare, utility, validate_instance)
from .distributions import Beta, Discrete, DistributionSpec, TruncatedNormal, Uniform
from .generators import NonIidGrid, PresetPolicy, condition_report, gen_iid, gen_non_iid
from .matching import MatchingResult, optimal_welfare, optimal_welfare_bruteforce
from .rp import (RpExact, WelfareEstimate, check_truthfulness, rp_exact, rp_run_once,
                 rp_welfare_lower_bound, rp_welfare_mc)

__version__ = "0.1.0"
