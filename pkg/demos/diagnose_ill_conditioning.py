"""Why relax the void stiffness? A before/after conditioning probe.

The toolkit's `diagnose-conditioning` subcommand evaluates two early
design iterates at both the hard void stiffness (1e-9) and the relaxed
one (1e-2) and reports how far the objective moves. The divergence on
early, badly disconnected iterates is the motivation for running the
first stages relaxed: at 1e-9 a stray island barely couples to the load
path and its objective carries almost no usable signal.

This wrapper just shells the CLI so the output matches what users see.
"""

from __future__ import annotations

import subprocess
import sys


def main() -> None:
    cmd = [sys.executable, "-m", "topocut", "diagnose-conditioning",
           "--preset", "mbb", "--resolution", "60x20"]
    print("$", " ".join(cmd[1:]))
    raise SystemExit(subprocess.call(cmd))


if __name__ == "__main__":
    main()
