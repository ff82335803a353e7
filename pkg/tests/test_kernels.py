import os
import subprocess
import sys

import numpy as np
import pytest

from pncvlc import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba path disabled")


def draws(n, seed):
    rng = np.random.default_rng(seed)
    c = lambda: rng.normal(size=n) + 1j * rng.normal(size=n)  # noqa: E731
    return c(), c(), c(), 1 / rng.uniform(0.01, 1.0, n)


@needs_numba
@pytest.mark.parametrize("exact", [True, False])
def test_backends_agree(exact):
    y, h_a, h_b, w = draws(100_000, 0)
    d_jit, s_jit = _kernels.xor_decide(y, h_a, h_b, w, exact, backend="numba")
    d_np, s_np = _kernels.xor_decide(y, h_a, h_b, w, exact, backend="numpy")
    np.testing.assert_array_equal(d_jit, d_np)
    np.testing.assert_allclose(s_jit, s_np, rtol=1e-12, atol=1e-12)


@needs_numba
def test_backends_agree_on_exact_ties():
    # aligned equal channels put several pairs on the same point
    pts = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)
    y = (pts[:, None] + pts[None, :]).reshape(-1)
    ones = np.ones_like(y)
    for backend in ("numba", "numpy"):
        d, _ = _kernels.xor_decide(y, ones, ones, 1.0, False, backend=backend)
        expect = [a ^ b for a in range(4) for b in range(4)]
        assert d.tolist() == expect


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.xor_decide([0j], 1, 1, 1.0, backend="cuda")


def test_env_flag_selects_numpy():
    env = dict(os.environ, PNCVLC_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from pncvlc import _kernels; print(_kernels.BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"
