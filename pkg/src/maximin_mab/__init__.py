"""Maximin multi-armed bandits: Maximin UCB, pseudo-regret simulation and bounds."""

from .analysis import ExperimentReport, aggregate_runs, concentration_check, theorem1_bound, theorem2_bound
from .core import Family, Observation, ProblemInstance, RngStream, make_instance, row_min, sample_rewards
from .experiments import ScenarioConfig, gen_affine_instance, run_gap_sweep, run_scale_sweep
from .policies import Policy, PolicyKind, PolicyState, init_state, select_channel, ucb_index, update_state
from .simulation import GapProfile, SimulationTrace, gap_profile, run_batch, run_episode

__version__ = "0.1.0"
