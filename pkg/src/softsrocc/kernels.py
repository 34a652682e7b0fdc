"""Pairwise O(n^2) kernels with a numba path and a pure-numpy fallback.

The numba kernels are used when numba imports cleanly and the environment
variable ``SOFTSROCC_DISABLE_NUMBA`` is unset (or ``0``). Both backends are
always importable so they can be benchmarked against each other; switch at
runtime with :func:`use_backend`.

Summation order is fixed in both backends, so each is bitwise-deterministic.
The numba soft-rank kernels visit each unordered pair ``i < j`` once, in
row-major order, adding the odd pairwise term to element ``i`` and
subtracting it from element ``j``; rank sums are therefore conserved to the
rounding of ``n`` accumulations. The numpy path evaluates full row blocks and
reduces each row with ``np.sum(axis=1)``. The two backends agree to rounding,
not bitwise.
"""

import contextlib
import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

NUMBA_AVAILABLE = numba is not None
_ENV_FLAG = "SOFTSROCC_DISABLE_NUMBA"

# rows per numpy block; block * n float64 temporaries stay near 8 MiB
_BLOCK_ELEMS = 1 << 20


def _numba_disabled_by_env():
    return os.environ.get(_ENV_FLAG, "0").strip().lower() not in ("", "0", "false", "no")


def _njit(fn):
    if not NUMBA_AVAILABLE:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def _row_blocks(n):
    step = max(1, _BLOCK_ELEMS // max(n, 1))
    for start in range(0, n, step):
        yield start, min(n, start + step)


def _sech2(u):
    # 4e/(1+e)^2 with e = exp(-2|u|): no overflow, no cancellation near 1 - tanh^2
    e = np.exp(-2.0 * np.abs(u))
    return 4.0 * e / ((1.0 + e) * (1.0 + e))


# --------------------------------------------------------------------------
# numpy backend


def _soft_rank_np(x, k):
    n = x.shape[0]
    out = np.empty(n)
    for a, b in _row_blocks(n):
        diff = x[a:b, None] - x[None, :]
        out[a:b] = np.sum(0.5 * (1.0 + np.tanh(k * diff)), axis=1)
    return out


def _soft_rank_vjp_np(x, k, g):
    n = x.shape[0]
    out = np.empty(n)
    for a, b in _row_blocks(n):
        s = _sech2(k * (x[a:b, None] - x[None, :]))
        out[a:b] = 0.5 * k * np.sum(s * (g[a:b, None] - g[None, :]), axis=1)
    return out


def _soft_rank_jacobian_np(x, k):
    s = _sech2(k * (x[:, None] - x[None, :]))
    np.fill_diagonal(s, 0.0)
    jac = -0.5 * k * s
    np.fill_diagonal(jac, 0.5 * k * np.sum(s, axis=1))
    return jac


def _margin_np(qhat, q, use_truth_order):
    n = qhat.shape[0]
    total = 0.0
    grad = np.zeros(n)
    for a, b in _row_blocks(n):
        dp = qhat[a:b, None] - qhat[None, :]
        dq = q[a:b, None] - q[None, :]
        if use_truth_order:
            e = np.where(dq >= 0.0, 1.0, -1.0)
            slope = np.sign(dp)
        else:
            e = np.where(dp >= 0.0, 1.0, -1.0)
            slope = e
        term = np.abs(dp) - e * dq
        active = term > 0.0
        total += float(np.sum(np.where(active, term, 0.0)))
        sg = np.where(active, slope, 0.0)
        grad[a:b] += np.sum(sg, axis=1)
        grad -= np.sum(sg, axis=0)
    return total, grad


# --------------------------------------------------------------------------
# numba backend (also valid pure python, which is what runs without numba)


@_njit
def _soft_rank_nb(x, k):
    # each unordered pair evaluated once; tanh is odd so (i, j) and (j, i) share it
    n = x.shape[0]
    out = np.full(n, 0.5 * n)
    for i in range(n):
        xi = x[i]
        for j in range(i + 1, n):
            t = 0.5 * math.tanh(k * (xi - x[j]))
            out[i] += t
            out[j] -= t
    return out


@_njit
def _soft_rank_vjp_nb(x, k, g):
    n = x.shape[0]
    out = np.zeros(n)
    for i in range(n):
        xi = x[i]
        gi = g[i]
        for j in range(i + 1, n):
            e = math.exp(-2.0 * abs(k * (xi - x[j])))
            t = 4.0 * e / ((1.0 + e) * (1.0 + e)) * (gi - g[j])
            out[i] += t
            out[j] -= t
    return 0.5 * k * out


@_njit
def _soft_rank_jacobian_nb(x, k):
    n = x.shape[0]
    jac = np.zeros((n, n))
    for i in range(n):
        diag = 0.0
        for j in range(n):
            if j == i:
                continue
            e = math.exp(-2.0 * abs(k * (x[i] - x[j])))
            s = 4.0 * e / ((1.0 + e) * (1.0 + e))
            jac[i, j] = -0.5 * k * s
            diag += s
        jac[i, i] = 0.5 * k * diag
    return jac


@_njit
def _margin_nb(qhat, q, use_truth_order):
    n = qhat.shape[0]
    total = 0.0
    grad = np.zeros(n)
    for i in range(n):
        for j in range(n):
            dp = qhat[i] - qhat[j]
            dq = q[i] - q[j]
            if use_truth_order:
                e = 1.0 if dq >= 0.0 else -1.0
                slope = 1.0 if dp > 0.0 else (-1.0 if dp < 0.0 else 0.0)
            else:
                e = 1.0 if dp >= 0.0 else -1.0
                slope = e
            term = abs(dp) - e * dq
            if term > 0.0:
                total += term
                grad[i] += slope
                grad[j] -= slope
    return total, grad


def _pav_decreasing_py(y):
    n = y.shape[0]
    level = np.empty(n)
    weight = np.empty(n)
    start = np.empty(n, dtype=np.int64)
    top = -1
    for i in range(n):
        top += 1
        level[top] = y[i]
        weight[top] = 1.0
        start[top] = i
        while top > 0 and level[top - 1] < level[top]:
            w = weight[top - 1] + weight[top]
            level[top - 1] = (weight[top - 1] * level[top - 1] + weight[top] * level[top]) / w
            weight[top - 1] = w
            top -= 1
    out = np.empty(n)
    for b in range(top + 1):
        stop = start[b + 1] if b < top else n
        for i in range(start[b], stop):
            out[i] = level[b]
    return out


_pav_decreasing_nb = _njit(_pav_decreasing_py)


# --------------------------------------------------------------------------
# dispatch

_BACKENDS = {
    "numba": {
        "soft_rank": _soft_rank_nb,
        "soft_rank_vjp": _soft_rank_vjp_nb,
        "soft_rank_jacobian": _soft_rank_jacobian_nb,
        "margin": _margin_nb,
        "pav": _pav_decreasing_nb,
    },
    "numpy": {
        "soft_rank": _soft_rank_np,
        "soft_rank_vjp": _soft_rank_vjp_np,
        "soft_rank_jacobian": _soft_rank_jacobian_np,
        "margin": _margin_np,
        "pav": _pav_decreasing_py,
    },
}

_active = "numba" if NUMBA_AVAILABLE and not _numba_disabled_by_env() else "numpy"


def available_backends():
    return ("numba", "numpy") if NUMBA_AVAILABLE else ("numpy",)


def active_backend():
    return _active


def set_backend(name):
    global _active
    if name not in available_backends():
        raise ValueError(f"backend {name!r} not available; choose from {available_backends()}")
    _active = name


@contextlib.contextmanager
def use_backend(name):
    prev = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def soft_rank(x, k):
    """r_i = sum_j (1 + tanh(k (x_i - x_j))) / 2, self term included."""
    return _BACKENDS[_active]["soft_rank"](x, float(k))


def soft_rank_vjp(x, k, g):
    """Return ``J^T g`` for the soft-rank Jacobian ``J`` without forming ``J``."""
    return _BACKENDS[_active]["soft_rank_vjp"](x, float(k), g)


def soft_rank_jacobian(x, k):
    return _BACKENDS[_active]["soft_rank_jacobian"](x, float(k))


def margin_pairs(qhat, q, use_truth_order=False):
    """Sum of hinge terms over all ordered pairs and its subgradient in ``qhat``."""
    total, grad = _BACKENDS[_active]["margin"](qhat, q, bool(use_truth_order))
    return float(total), grad


def pav_decreasing(y):
    """Least-squares fit of a non-increasing sequence to ``y`` (pool adjacent violators)."""
    return _BACKENDS[_active]["pav"](np.ascontiguousarray(y, dtype=np.float64))
