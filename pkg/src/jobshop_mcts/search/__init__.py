"""Monte-Carlo search family over job orderings."""

from .flat import flat_mcs_plan
from .mcts import Node, TreeSearch, hmcts_plan, mcts_plan, parallel_search
from .nmcs import hnmcs_plan, nmcs_plan
from .policy import (ENHANCEMENTS, BestPath, BigramHistory, SearchBudget, SearchConfig,
                     SearchResult, StepClock, time_for_step, uct_ph_value, uct_value)
from .space import ActionSpace, SimState

__all__ = [
    "ActionSpace", "BestPath", "BigramHistory", "ENHANCEMENTS", "Node", "SearchBudget",
    "SearchConfig", "SearchResult", "SimState", "StepClock", "TreeSearch", "flat_mcs_plan",
    "hmcts_plan", "hnmcs_plan", "mcts_plan", "nmcs_plan", "parallel_search", "time_for_step",
    "uct_ph_value", "uct_value",
]
