"""
Resource accounting for simulation runs.

Cost is counted in mode-steps: state modes x time steps x paths x (levels + 1),
weighted per equation family by the relative price of one mode-step.
"""

import logging
from typing import Dict, Optional

from app.utils.errors import BudgetExceededError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

# Relative price of one mode-step; grid products (multiplicative noise,
# Nemytskii drifts) roughly quadruple it.
FAMILY_WEIGHTS: Dict[str, float] = {
    "wave": 2.0,
    "schrodinger": 2.0,
    "airy": 1.0,
    "hjmm": 1.0,
    "diagonal": 1.0,
    "default": 1.0,
}
COLLOCATION_FACTOR = 4.0


def estimate_run_cost(
    family: str,
    modes: int,
    steps: int,
    paths: int,
    levels: int,
    collocation: bool = False,
    weights: Optional[Dict[str, float]] = None,
) -> Dict[str, float]:
    """
    Estimate the cost of an error-estimation run.

    Args:
        family: Equation family name.
        modes: Reference resolution n_ref (or the state size when larger).
        steps: Time steps M.
        paths: Monte Carlo paths P.
        levels: Number of truncation levels (the reference run is added).
        collocation: Whether each step evaluates products on a grid.
        weights: Optional custom family weights. If None, uses FAMILY_WEIGHTS.

    Returns:
        Dictionary with mode_steps, weight and total_cost.
    """
    if weights is None:
        weights = FAMILY_WEIGHTS
    weight = weights.get(family)
    if weight is None:
        logger.warning(f"No cost weight for family {family}, using default")
        weight = weights.get("default", 1.0)
    if collocation:
        weight *= COLLOCATION_FACTOR
    mode_steps = float(modes) * steps * paths * (levels + 1)
    return {
        "mode_steps": mode_steps,
        "weight": weight,
        "total_cost": mode_steps * weight,
    }


def check_budget(cost: Dict[str, float], budget: float) -> None:
    """
    Refuse runs above `budget`.

    Raises:
        BudgetExceededError: With guidance on what to lower.
    """
    if cost["total_cost"] > budget:
        raise BudgetExceededError(
            f"Estimated cost {cost['total_cost']:.3g} exceeds the budget {budget:.3g}; "
            "lower paths, steps or n_ref, or raise experiment.budget"
        )
    logger.info(f"Estimated cost {cost['total_cost']:.3g} within budget {budget:.3g}")


def print_run_usage(cost: Dict[str, float], budget: float) -> None:
    """Print the cost breakdown of a run."""
    print("Run cost:")
    print("--------------------------------")
    print(f"Mode-steps: {cost['mode_steps']:,.0f}")
    print(f"Family weight: {cost['weight']:g}")
    print(f"Total cost: {cost['total_cost']:,.0f}")
    print(f"Budget: {budget:,.0f} ({100.0 * cost['total_cost'] / budget:.2f}% used)")
    print("--------------------------------")
