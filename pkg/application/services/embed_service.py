from dataclasses import dataclass

from application.commands.embed_message import EmbedMessage
from domain.coding.message import ChangeMap
from domain.common.errors import InvariantViolation
from domain.cost.model import CostMap
from domain.cost.rules import apply_wet_bounds
from domain.cost.schemes import cost_scheme
from domain.image.model import GrayImage
from domain.syncdir.embedding import EmbedConfig, embed_plain, embed_synchronized
from domain.syncdir.lattice import TraversalOrder
from infrastructure.cost_repository import load_costs, save_costs
from infrastructure.message_repository import read_message
from infrastructure.pgm_repository import load_image, save_image


def embed_config_for(
    pixels: int,
    *,
    seed: int,
    bits: int | None,
    payload_rate: float | None,
    coder: str,
    stc_h: int,
    beta: float,
    neighborhood: str,
) -> EmbedConfig:
    """EmbedConfig from either an explicit bit count or a payload rate."""
    if (bits is None) == (payload_rate is None):
        raise InvariantViolation("Give exactly one of a bit count and a payload rate")
    if bits is not None:
        if bits < 0:
            raise InvariantViolation(f"bits must be non-negative, got {bits}")
        payload_rate = bits / pixels
    return EmbedConfig(
        payload_rate=payload_rate,
        seed=seed,
        beta=beta,
        coder_mode=coder,
        stc_h=stc_h,
        neighborhood=neighborhood,
    )


@dataclass(frozen=True)
class EmbedResult:
    stego: GrayImage
    costs: CostMap
    order: TraversalOrder | None
    bits: int
    changes: int


class EmbedService:
    """
    Application Service for hiding a message file in a cover.
    """

    def execute(self, command: EmbedMessage) -> EmbedResult:
        scheme = cost_scheme(command.scheme)
        cover = load_image(command.cover_path)
        cfg = embed_config_for(
            cover.width * cover.height,
            seed=command.seed,
            bits=command.bits,
            payload_rate=command.payload_rate,
            coder=command.coder,
            stc_h=command.stc_h,
            beta=command.beta,
            neighborhood=command.neighborhood,
        )
        bits = cfg.message_length(cover.width * cover.height)
        message = read_message(command.message_path, bits)
        initial = load_costs(command.costs_path) if command.costs_path else scheme(cover)

        if command.plain:
            stego = embed_plain(cover, message, initial, cfg)
            costs, order = apply_wet_bounds(initial, cover), None
        else:
            stego, costs, order = embed_synchronized(cover, message, initial, cfg)

        save_image(stego, command.out_path)
        if command.dump_costs is not None:
            save_costs(costs, command.dump_costs)
        return EmbedResult(stego, costs, order, bits, ChangeMap.between(cover, stego).changed)
