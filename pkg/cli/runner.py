from cli.common import execute
from cli.sampling import bridge_command, couple_sum_command, embed_command
from cli.scaling import history_command, scaling_command
from cli.validate import constants_command, validate_law_command
from cli.verify import verify_small_command
from embedding.errors import InvalidInput

handlers = {
    "validate": validate_law_command,
    "couple-sum": couple_sum_command,
    "bridge": bridge_command,
    "embed": embed_command,
    "verify-small": verify_small_command,
    "scaling": scaling_command,
    "constants": constants_command,
    "history": history_command,
}


def run(config):
    """Execute a RunConfig without click; returns the process exit status."""
    handler = handlers.get(config.command)
    if handler is None:
        raise InvalidInput(f"unknown command {config.command!r}; choose from {', '.join(handlers)}")
    return execute(config, handler)
