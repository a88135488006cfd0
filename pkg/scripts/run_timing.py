"""Run the timing experiment: `python scripts/run_timing.py [--config FILE] [--out DIR] ...`.

Accepts the same flags as `fmcwsparse exp timing`.
"""

import sys

from fmcwsparse.cli import main

if __name__ == "__main__":
    sys.exit(main(["exp", "timing", *sys.argv[1:]]))
