"""Monte-Carlo search for job orderings that get the most out of a black-box scheduler."""

from .core import (InstanceError, Interval, Job, JobSet, Machine, Plan, Schedule,
                   ScheduleStructureError, Violation, validate_schedule)
from .hierarchy import OptionHierarchy
from .metrics import (Evaluator, lateness_lower_bound, makespan, max_lateness, mixed_score,
                      normalize_score, tardiness, total_lateness, trivial_lower_bound)
from .schedulers import (OfflineDispatcher, OnlineDispatcher, heuristic_plan, make_dispatcher,
                         offline_dispatch, online_dispatch)
from .instances import gen_demirkol, gen_problem1
from .search import (SearchBudget, SearchConfig, SearchResult, flat_mcs_plan, hmcts_plan,
                     hnmcs_plan, mcts_plan, nmcs_plan, parallel_search, time_for_step,
                     uct_ph_value, uct_value)

__version__ = "0.1.0"
