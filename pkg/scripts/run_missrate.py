"""Run the missrate experiment: `python scripts/run_missrate.py [--config FILE] [--out DIR] ...`.

Accepts the same flags as `fmcwsparse exp missrate`.
"""

import sys

from fmcwsparse.cli import main

if __name__ == "__main__":
    sys.exit(main(["exp", "missrate", *sys.argv[1:]]))
