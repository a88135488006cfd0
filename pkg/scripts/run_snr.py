"""Run the snr experiment: `python scripts/run_snr.py [--config FILE] [--out DIR] ...`.

Accepts the same flags as `fmcwsparse exp snr`.
"""

import sys

from fmcwsparse.cli import main

if __name__ == "__main__":
    sys.exit(main(["exp", "snr", *sys.argv[1:]]))
