from typing import Callable

from domain.common.errors import InvariantViolation
from domain.cost.hill import hill_cost
from domain.cost.model import CostMap
from domain.cost.suniward import suniward_cost
from domain.image.model import GrayImage

CostScheme = Callable[[GrayImage], CostMap]

COST_SCHEMES: dict[str, CostScheme] = {
    "hill": hill_cost,
    "suniward": suniward_cost,
}


def cost_scheme(name: str) -> CostScheme:
    try:
        return COST_SCHEMES[name]
    except KeyError:
        raise InvariantViolation(
            f"Unknown cost scheme {name!r}; expected one of {sorted(COST_SCHEMES)}"
        ) from None
