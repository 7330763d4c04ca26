from application.commands.extract_message import ExtractMessage
from domain.coding.message import BitMessage
from domain.coding.stc import StcParams, default_hat
from domain.common.errors import InvariantViolation
from domain.syncdir.embedding import extract_plain, extract_synchronized
from infrastructure.message_repository import write_message
from infrastructure.pgm_repository import load_image


class ExtractService:
    """
    Application Service for reading a message back out of an STC stego.
    """

    def execute(self, command: ExtractMessage) -> BitMessage:
        if command.bits < 0:
            raise InvariantViolation(f"bits must be non-negative, got {command.bits}")
        params = StcParams(h=command.stc_h, hat=default_hat(command.stc_h))
        stego = load_image(command.stego_path)
        if command.plain:
            message = extract_plain(stego, command.bits, params)
        else:
            message = extract_synchronized(stego, command.bits, params)
        if command.out_path is not None:
            write_message(message, command.out_path)
        return message
