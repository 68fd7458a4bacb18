"""
Explicit constants of the noise-truncation error bound.

    E||X^inf_T - X^n_T||^2 + |E phi(X^inf_T) - E phi(X^n_T)| / ||phi||_{C^2_b}
        <= C * sup_{x in V} sum_{k>=n} ||B(x)e_k||^2_H / (1 + ||x||^2_V)

with C = (T/2) C1 (1 + C2^2). C3 and C4 bound the first and second spatial
derivatives of the Kolmogorov solution; `apriori` bounds sup_t ||X_t||_{L^2(H)}.
The C^1_b norms stand in for the Lipschitz norms on H.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict

from app.equations.EquationSpec_class import CoefficientNorms
from app.utils.errors import ConfigurationError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundConstants:
    c1: float
    c2: float
    c3: float
    c4: float
    c: float
    apriori: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def bound_constants(norms: CoefficientNorms, horizon: float) -> BoundConstants:
    """
    Evaluate C1..C4, C and the a priori bound.

    Args:
        norms: Semigroup, coefficient and initial-value norms of an equation.
        horizon: Final time T.

    Returns:
        The constants as closed-form expressions of the inputs.
    """
    if horizon <= 0:
        raise ConfigurationError(f"Horizon T must be positive, got {horizon}")
    values = norms.as_dict()
    negative = [name for name, value in values.items() if value < 0]
    if negative:
        raise ConfigurationError(f"Norms must be nonnegative: {negative}")

    t = horizon
    s_h, s_v = norms.semigroup_h, norms.semigroup_v
    f1, f2 = norms.drift_c1, norms.drift_c2
    b1, b2 = norms.diffusion_c1, norms.diffusion_c2

    c3 = s_h * math.exp(t * s_h**2 * (f1 + 0.5 * b1**2))
    c4 = (
        math.exp(t * (3.5 * f2 + 4.0 * b1**2) * s_h**4)
        * math.sqrt(t)
        * s_h**3
        * math.sqrt(f2 + 2.0 * b2**2)
    )
    c1 = c4 + s_h**2 * math.exp(t * (2.0 * f1 + b1**2) * s_h**2)
    growth_v = math.sqrt(2.0 * t) * (norms.drift_lip_v + norms.diffusion_lip_v)
    c2 = (
        s_v
        * (norms.initial_v + growth_v)
        * math.exp(t * s_v**2 * (0.5 + norms.drift_lip_v**2 + norms.diffusion_lip_v**2))
    )
    apriori = (
        s_h
        * (norms.initial_h + math.sqrt(2.0 * t) * (f1 + b1))
        * math.exp(t * s_h**2 * (0.5 + f1**2 + b1**2))
    )
    c = 0.5 * t * c1 * (1.0 + c2**2)
    logger.debug(f"Bound constants at T={t}: C1={c1}, C2={c2}, C={c}")
    return BoundConstants(c1=c1, c2=c2, c3=c3, c4=c4, c=c, apriori=apriori)
