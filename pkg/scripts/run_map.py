"""Run the map experiment: `python scripts/run_map.py [--config FILE] [--out DIR] ...`.

Accepts the same flags as `fmcwsparse exp map`.
"""

import sys

from fmcwsparse.cli import main

if __name__ == "__main__":
    sys.exit(main(["exp", "map", *sys.argv[1:]]))
