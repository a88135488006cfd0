"""Run the theorem experiment: `python scripts/run_theorem.py [--config FILE] [--out DIR] ...`.

Accepts the same flags as `fmcwsparse exp theorem`.
"""

import sys

from fmcwsparse.cli import main

if __name__ == "__main__":
    sys.exit(main(["exp", "theorem", *sys.argv[1:]]))
