import logging
import sys

import click

from cli.config import ApplicationConfig
from cli.sampling import bridge, couple_sum, embed
from cli.scaling import history, scaling
from cli.validate import constants, validate
from cli.verify import verify_small


# Create app
@click.group()
@click.option("-v", "--verbose", count=True, help="INFO once, DEBUG twice.")
@click.option("--seed", type=int, default=ApplicationConfig.SEED, show_default=True,
              help="Master seed shared by every command; each output is a function of it.")
def app(verbose, seed):
    """Strong embeddings of finite-support random walks into Brownian motion."""
    level = ApplicationConfig.LOG_LEVEL.upper()
    if verbose:
        level = "DEBUG" if verbose > 1 else "INFO"
    logging.basicConfig(stream=sys.stderr, level=level, force=True,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


app.add_command(validate)
app.add_command(constants)
app.add_command(couple_sum)
app.add_command(bridge)
app.add_command(embed)
app.add_command(verify_small)
app.add_command(scaling)
app.add_command(history)

if __name__ == "__main__":
    app()
