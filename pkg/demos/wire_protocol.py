"""The newline-JSON wire protocol, shown at both levels.

First speaks the protocol by hand over a pipe to an `oracle-serve` child so
the literal request and response lines are visible, then does the same
round trip through connect_external() and checks the numbers agree with the
in-process oracle bit for bit.
"""

import json
import subprocess
import sys

import numpy as np

from latinv import connect_external, make_testbed_oracle

SERVE = [sys.executable, "-m", "latinv", "oracle-serve"]


def main() -> None:
    # Level 1: raw lines. One JSON object per line, ids strictly increasing,
    # responses in request order.
    proc = subprocess.Popen(SERVE, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
    requests = [
        {"id": 0, "op": "meta"},
        {"id": 1, "op": "query", "codes": [[0.0] * 8, [1.0] * 8]},
        {"id": 2, "op": "query", "codes": [[0.5] * 4]},  # wrong width, answered not fatal
        {"id": 3, "op": "meta"},
    ]
    print("Raw exchange with an oracle-serve child:")
    for req in requests:
        line = json.dumps(req, separators=(",", ":"))
        proc.stdin.write(line + "\n")
        proc.stdin.flush()
        reply = proc.stdout.readline().rstrip("\n")
        shown = reply if len(reply) < 100 else reply[:97] + "..."
        print(f"  -> {line}")
        print(f"  <- {shown}")
    proc.stdin.close()
    proc.wait(timeout=10)

    # Level 2: the client wrapper. Same protocol, plus timeouts, error
    # mapping, and response validation.
    remote = connect_external("cmd:" + " ".join(SERVE))
    local = make_testbed_oracle()
    print(f"\nconnect_external reports {remote.num_classes} classes, "
          f"{remote.latent_dim}-dim codes.")
    codes = np.linspace(-1.0, 1.0, 16).reshape(2, 8)
    over_wire = remote.query(codes)
    in_process = local.query(codes)
    print("Wire result equals in-process result exactly:",
          bool(np.array_equal(over_wire, in_process)))
    remote.close()


if __name__ == "__main__":
    main()
