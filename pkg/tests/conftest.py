from __future__ import annotations

import pytest

from perclab import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile (or load from disk cache) the numba kernels once."""
    _kernels.warm_up()
