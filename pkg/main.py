"""Run the pariscba command line from a source checkout: ``python main.py cba --target 2.0``."""

import sys

from src.pariscba.cli import main

if __name__ == "__main__":
    sys.exit(main())
