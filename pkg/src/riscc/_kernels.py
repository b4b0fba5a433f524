"""Hot numeric kernels: numba-jitted loops with a pure-numpy fallback.

The backend is chosen once at import time from the ``RISCC_BACKEND``
environment variable: ``auto`` (default, numba when importable),
``numba`` (fail if unavailable) or ``numpy``.

Both backends implement identical arithmetic (same summation order per
element), so results agree to the last few ulp; each backend is fully
deterministic on its own.
"""

import os

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAS_NUMBA = False

ENV_VAR = "RISCC_BACKEND"


def _requested_backend() -> str:
    choice = os.environ.get(ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"{ENV_VAR} must be 'auto', 'numba' or 'numpy', got {choice!r}")
    if choice == "auto":
        return "numba" if HAS_NUMBA else "numpy"
    if choice == "numba" and not HAS_NUMBA:
        raise ImportError(f"{ENV_VAR}=numba requested but numba is not importable")
    return choice


# ---------------------------------------------------------------------------
# loop-form kernels (compiled under numba; also usable as slow references)

def _phase_profile_inner_loop(theta_out, theta_in, omega):
    n = omega.shape[0]
    n_out = theta_out.shape[0]
    n_in = theta_in.shape[0]
    res = np.empty((n_out, n_in), np.complex128)
    for a in range(n_out):
        for b in range(n_in):
            acc = 0.0 + 0.0j
            d = theta_in[b] - theta_out[a]
            for m in range(n):
                ph = m * d + omega[m]
                acc += complex(np.cos(ph), np.sin(ph))
            res[a, b] = acc / n
    return res


def _search_orthogonal_paths_loop(pair_pow, offsets, subsets):
    n_sub, n_sel = subsets.shape
    best_obj = np.inf
    best_sub = -1
    best_choice = np.zeros(n_sel, np.int64)
    choice = np.zeros(n_sel, np.int64)
    counts = np.zeros(n_sel, np.int64)
    base = np.zeros(n_sel, np.int64)
    for s in range(n_sub):
        for i in range(n_sel):
            k = subsets[s, i]
            base[i] = offsets[k]
            counts[i] = offsets[k + 1] - offsets[k]
            choice[i] = 0
        while True:
            obj = 0.0
            for i in range(n_sel):
                pi = base[i] + choice[i]
                for j in range(i + 1, n_sel):
                    obj += pair_pow[pi, base[j] + choice[j]]
            obj *= 2.0
            if obj < best_obj:
                best_obj = obj
                best_sub = s
                for i in range(n_sel):
                    best_choice[i] = choice[i]
            # odometer over path choices, rightmost digit fastest
            pos = n_sel - 1
            while pos >= 0:
                choice[pos] += 1
                if choice[pos] < counts[pos]:
                    break
                choice[pos] = 0
                pos -= 1
            if pos < 0:
                break
    return best_obj, best_sub, best_choice


# ---------------------------------------------------------------------------
# vectorized numpy fallbacks

def _phase_profile_inner_numpy(theta_out, theta_in, omega):
    n = omega.shape[0]
    idx = np.arange(n)
    a_out = np.exp(1j * np.outer(idx, theta_out))
    a_in = np.exp(1j * np.outer(idx, theta_in))
    return (a_out.conj() * np.exp(1j * omega)[:, None]).T @ a_in / n


def _search_orthogonal_paths_numpy(pair_pow, offsets, subsets):
    n_sel = subsets.shape[1]
    best_obj = np.inf
    best_sub = -1
    best_choice = np.zeros(n_sel, np.int64)
    for s in range(subsets.shape[0]):
        subset = subsets[s]
        spans = [slice(offsets[k], offsets[k + 1]) for k in subset]
        sizes = [offsets[k + 1] - offsets[k] for k in subset]
        obj = np.zeros(sizes)
        for i in range(n_sel):
            for j in range(i + 1, n_sel):
                shape = [1] * n_sel
                shape[i] = sizes[i]
                shape[j] = sizes[j]
                obj = obj + pair_pow[spans[i], spans[j]].reshape(shape)
        obj = 2.0 * obj
        flat = int(np.argmin(obj))  # first minimum in C order == lexicographic
        val = float(obj.flat[flat])
        if val < best_obj:
            best_obj = val
            best_sub = s
            best_choice = np.array(np.unravel_index(flat, obj.shape), dtype=np.int64)
    return best_obj, best_sub, best_choice


BACKEND = _requested_backend()

if BACKEND == "numba":
    _jit = numba.njit(cache=True)
    phase_profile_inner = _jit(_phase_profile_inner_loop)
    search_orthogonal_paths = _jit(_search_orthogonal_paths_loop)
else:
    phase_profile_inner = _phase_profile_inner_numpy
    search_orthogonal_paths = _search_orthogonal_paths_numpy
