from __future__ import annotations

import os
import sys

# Make the user-model fixture module importable both here and in served
# subprocesses (which get it via PYTHONPATH).
TESTS_DIR = os.path.dirname(__file__)
if TESTS_DIR not in sys.path:
    sys.path.insert(0, TESTS_DIR)
