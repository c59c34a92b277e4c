# Copyright (c) 2026, the gemmlint authors
# SPDX-License-Identifier: Apache-2.0
"""Transformer shape / GPU GEMM efficiency analysis.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its surface.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
