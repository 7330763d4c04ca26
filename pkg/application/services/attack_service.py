from application.commands.attack_stego import AttackStego
from application.services.embed_service import embed_config_for
from domain.adversary.attack import AdvConfig, AttackOutcome, ite_syn_attack
from domain.coding.message import ChangeMap
from domain.cost.model import CostMap
from domain.cost.rules import apply_wet_bounds
from domain.cost.schemes import cost_scheme
from domain.image.model import GrayImage
from domain.syncdir.cmd import adjust_costs
from infrastructure.cost_repository import load_costs
from infrastructure.message_repository import read_message
from infrastructure.model_repository import load_model
from infrastructure.pgm_repository import load_image, save_image


def rebuild_adjusted_costs(
    cover: GrayImage, stego: GrayImage, scheme: str, beta: float, neighborhood: str
) -> CostMap:
    """The sender's final synchronized costs, recomputed from the cover and the full change map."""
    base = apply_wet_bounds(cost_scheme(scheme)(cover), cover)
    return adjust_costs(base, ChangeMap.between(cover, stego), beta, neighborhood)


class AttackService:
    """
    Application Service for one adversarial re-embedding attack.
    """

    def execute(self, command: AttackStego) -> AttackOutcome:
        adv = AdvConfig(delta_gamma=command.delta_gamma, gamma_max=command.gamma_max, seed=command.seed)
        cost_scheme(command.scheme)

        model = load_model(command.model_path)
        cover = load_image(command.cover_path)
        stego = load_image(command.stego_path)
        cfg = embed_config_for(
            cover.width * cover.height,
            seed=command.seed,
            bits=command.bits,
            payload_rate=None,
            coder=command.coder,
            stc_h=command.stc_h,
            beta=command.beta,
            neighborhood=command.neighborhood,
        )
        message = read_message(command.message_path, command.bits)
        if command.costs_path is not None:
            adjusted = load_costs(command.costs_path)
        else:
            adjusted = rebuild_adjusted_costs(cover, stego, command.scheme, command.beta, command.neighborhood)

        outcome = ite_syn_attack(model, cover, message, stego, adjusted, adv, cfg)
        save_image(outcome.adversarial_stego, command.out_path)
        return outcome
