"""Compare evaluation with and without specialization on generated catalogs.

Usage: python scripts/benchmark.py [sizes in KB, comma separated]
"""

import sys
import tempfile

from xpathlp.cli import main

if __name__ == "__main__":
    sizes = sys.argv[1] if len(sys.argv) > 1 else "16,32,64,128"
    with tempfile.TemporaryDirectory() as stores:
        sys.exit(main(["bench", stores, "--sizes", sizes]))
