from application.commands.compute_costs import ComputeCosts
from domain.cost.model import CostMap
from domain.cost.rules import apply_wet_bounds
from domain.cost.schemes import cost_scheme
from infrastructure.cost_repository import save_costs
from infrastructure.pgm_repository import load_image


class CostService:
    """
    Application Service computing a wet-bounded cost map for one cover.
    """

    def execute(self, command: ComputeCosts) -> CostMap:
        scheme = cost_scheme(command.scheme)
        cover = load_image(command.cover_path)
        costs = apply_wet_bounds(scheme(cover), cover)
        save_costs(costs, command.out_path)
        return costs
