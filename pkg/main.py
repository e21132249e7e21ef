import logging
import sys

import squeezer.config as config
from squeezer.cli.commands import main

logging.basicConfig(
    level=logging.DEBUG if config.DEBUG else config.LOG_LEVEL,
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)

if __name__ == "__main__":
    sys.exit(main())
