"""Online renewal-reward optimization: a projected Robbins-Monro controller
for the optimal reward-per-unit-time ratio, example systems, exact and
Monte-Carlo oracles, and a multi-path verification harness."""

from .controller import ControllerState, RunRecord, ThetaBracket, default_bracket, run, step, stepsize
from .decisions import BestResponse, CurveSet, Decision, FiniteSet, best_response, enumerate_grid
from .environments import EnvSpec, Environment, MomentConstants, System, moments, stationary_expectation
from .oracle import OracleResult, m_function, m_function_mc, solve_theta_star

__version__ = "0.1.0"
