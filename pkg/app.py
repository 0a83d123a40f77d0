import logging
import logging.config
import os

import click

from config import get_settings
from core.experiments.routes import design, label, reproduce, simulate

settings = get_settings()


def configure_logging() -> None:
    if os.path.exists(settings.LOGGING_CONFIG):
        logging.config.fileConfig(settings.LOGGING_CONFIG, disable_existing_loggers=False)
    else:
        logging.basicConfig(format="%(levelname)-5.5s [%(name)s] %(message)s")
    logging.getLogger("core").setLevel(settings.LOG_LEVEL.upper())


@click.group(help=f"{settings.APP_NAME}: CSK constellation design, labeling and BER simulation.")
def app():
    configure_logging()


app.add_command(design)
app.add_command(label)
app.add_command(simulate)
app.add_command(reproduce)

if __name__ == "__main__":
    app()
