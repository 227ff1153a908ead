"""Equilibrium solvers for two-sided commuting-service platform markets."""

from cspmkt.core import (
    ConditionReport,
    CSPError,
    DuopolyParams,
    EquilibriumOutcome,
    MonopolyParams,
    Participation,
    PricePair,
    PriceQuad,
    validate_duopoly,
    validate_monopoly,
)
from cspmkt.monopoly import monopoly_demand, monopoly_equilibrium, monopoly_profit
from cspmkt.duopoly import duopoly_demand, duopoly_profits, nash_equilibrium, symmetric_equilibrium
from cspmkt.constrained import ConstraintSpec, constrained_nash, feasible, feasible_region
from cspmkt.multihome import onesided_equilibrium, validate_appendix
from cspmkt.sweep import AxisSpec, find_threshold, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "ConditionReport",
    "ConstraintSpec",
    "CSPError",
    "DuopolyParams",
    "EquilibriumOutcome",
    "MonopolyParams",
    "Participation",
    "PricePair",
    "PriceQuad",
    "constrained_nash",
    "duopoly_demand",
    "duopoly_profits",
    "feasible",
    "feasible_region",
    "find_threshold",
    "monopoly_demand",
    "monopoly_equilibrium",
    "monopoly_profit",
    "nash_equilibrium",
    "onesided_equilibrium",
    "run_sweep",
    "symmetric_equilibrium",
    "validate_appendix",
    "validate_duopoly",
    "validate_monopoly",
]
