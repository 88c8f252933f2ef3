"""Oracle adapter: put any generator + classifier pair behind the wire protocol.

The engine talks to external oracles over newline-delimited JSON (one
request object per line, strictly sequential, ids increasing, responses in
request order). This package is the other side of that conversation. In
`stub` mode it serves the same prototype-softmax testbed the engine ships,
computed with the identical float64 arithmetic so answers match the
in-process oracle bit for bit. In `user-model` mode it wraps two opaque
callables, a latent-code generator and a classifier, resolved from entry
point strings, and reports their exceptions in-protocol instead of dying.

The package deliberately has no dependency on the engine; everything it
needs (the protocol shapes, the stub arithmetic, the prototype convention)
is re-derived here from the documented contract, and `conformance_check`
verifies any adapter process against that contract from the outside.
"""

from .config import AdapterConfig, AdapterConfigError, StubSpec
from .conformance import CheckEntry, ConformanceReport, conformance_check
from .server import build_model, handle_request_line, serve
from .stub import stub_probs, testbed_prototypes

__all__ = [
    "AdapterConfig",
    "AdapterConfigError",
    "CheckEntry",
    "ConformanceReport",
    "StubSpec",
    "build_model",
    "conformance_check",
    "handle_request_line",
    "serve",
    "stub_probs",
    "testbed_prototypes",
]

__version__ = "0.1.0"
