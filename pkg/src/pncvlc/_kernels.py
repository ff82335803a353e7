"""Hot loop of the relay: per-observation XOR likelihoods over the 16 symbol pairs.

Two interchangeable implementations are kept: a numba-compiled scalar loop and
a vectorised numpy path. Set ``PNCVLC_DISABLE_NUMBA=1`` (or numba's own
``NUMBA_DISABLE_JIT=1``) to force the numpy path; it is also used when numba
cannot be imported. Both return identical decisions.
"""

from __future__ import annotations

import os

import numpy as np

_S = np.array([(1 - 2 * (i >> 1)) + 1j * (1 - 2 * (i & 1)) for i in range(4)]) / np.sqrt(2.0)
# pairs grouped by XOR hypothesis: row r lists the A indices, B index is a ^ r
_PAIR_A = np.array([[a for a in range(4)] for _ in range(4)])
_PAIR_B = np.array([[a ^ r for a in range(4)] for r in range(4)])

_disabled = os.environ.get("PNCVLC_DISABLE_NUMBA", "") not in ("", "0") or os.environ.get(
    "NUMBA_DISABLE_JIT", ""
) not in ("", "0")

try:
    if _disabled:
        raise ImportError
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def xor_scores_numpy(y, h_a, h_b, inv_sigma2, exact):
    """Log-likelihood (exact) or negative scaled min distance (max-log) per hypothesis."""
    # (M, 4 hypotheses, 4 pairs); real arithmetic mirrors the compiled loop
    sa, sb = _S[_PAIR_A][None], _S[_PAIR_B][None]
    ar, ai = h_a.real[:, None, None], h_a.imag[:, None, None]
    br, bi = h_b.real[:, None, None], h_b.imag[:, None, None]
    xr = ar * sa.real - ai * sa.imag + br * sb.real - bi * sb.imag
    xi = ar * sa.imag + ai * sa.real + br * sb.imag + bi * sb.real
    dr = y.real[:, None, None] - xr
    di = y.imag[:, None, None] - xi
    metric = -(dr * dr + di * di) * inv_sigma2[:, None, None]
    top = metric.max(axis=2)
    if not exact:
        return top
    return top + np.log(np.exp(metric - top[:, :, None]).sum(axis=2))


def _decide_numpy(y, h_a, h_b, inv_sigma2, exact):
    scores = xor_scores_numpy(y, h_a, h_b, inv_sigma2, exact)
    # argmax returns the first maximum: ties go to the smallest hypothesis
    return scores.argmax(axis=1).astype(np.uint8), scores


if HAVE_NUMBA:
    _SR = np.ascontiguousarray(_S.real)
    _SI = np.ascontiguousarray(_S.imag)

    @numba.njit(cache=True, nogil=True, error_model="numpy")
    def _decide_jit(y, h_a, h_b, inv_sigma2, exact, sr, si):
        m = y.shape[0]
        out = np.empty(m, dtype=np.uint8)
        scores = np.empty((m, 4))
        metric = np.empty(4)
        for i in range(m):
            yr, yi = y[i].real, y[i].imag
            ar, ai = h_a[i].real, h_a[i].imag
            br, bi = h_b[i].real, h_b[i].imag
            w = inv_sigma2[i]
            best = 0
            for r in range(4):
                top = -np.inf
                for a in range(4):
                    b = a ^ r
                    # h_a*s_a + h_b*s_b
                    xr = ar * sr[a] - ai * si[a] + br * sr[b] - bi * si[b]
                    xi = ar * si[a] + ai * sr[a] + br * si[b] + bi * sr[b]
                    dr = yr - xr
                    di = yi - xi
                    v = -(dr * dr + di * di) * w
                    metric[a] = v
                    if v > top:
                        top = v
                if exact:
                    acc = 0.0
                    for a in range(4):
                        acc += np.exp(metric[a] - top)
                    s = top + np.log(acc)
                else:
                    s = top
                scores[i, r] = s
                if r > 0 and s > scores[i, best]:
                    best = r
            out[i] = best
        return out, scores

    def _decide(y, h_a, h_b, inv_sigma2, exact):
        return _decide_jit(y, h_a, h_b, inv_sigma2, bool(exact), _SR, _SI)

    BACKEND = "numba"
else:
    _decide = _decide_numpy
    BACKEND = "numpy"


def _prep(y, h_a, h_b, inv_sigma2):
    y = np.ascontiguousarray(y, dtype=np.complex128).reshape(-1)
    m = y.size
    h_a = np.ascontiguousarray(np.broadcast_to(h_a, (m,)), dtype=np.complex128)
    h_b = np.ascontiguousarray(np.broadcast_to(h_b, (m,)), dtype=np.complex128)
    w = np.ascontiguousarray(np.broadcast_to(inv_sigma2, (m,)), dtype=np.float64)
    return y, h_a, h_b, w


def xor_decide(y, h_a, h_b, inv_sigma2, exact=True, backend=None):
    """Return (decisions, scores) for every observation.

    ``inv_sigma2`` is 1/sigma^2 per observation; with ``exact=False`` only
    the closest pair per hypothesis counts (max-log), and any positive weight
    gives the min-distance rule.
    """
    args = _prep(y, h_a, h_b, inv_sigma2)
    if backend is None:
        return _decide(*args, exact)
    if backend == "numpy":
        return _decide_numpy(*args, exact)
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is disabled or missing")
        return _decide_jit(*args, bool(exact), _SR, _SI)
    raise ValueError(f"unknown backend {backend!r}")
