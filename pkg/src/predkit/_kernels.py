"""Array kernels for the explicit-state oracle.

Each kernel has a numba version and a plain numpy version with the same
signature.  ``PREDKIT_NUMBA=0`` (or a missing numba) selects numpy at import
time; :func:`use_backend` switches at run time.

Atoms are stored densely: row ``k`` of ``coeffs`` holds atom ``k``'s
coefficients over the state columns, ``ops`` is 0 (<=), 1 (=) or 2 (mod).
A DNF is a CSR list of atom indices per cube.
"""
from __future__ import annotations

import os

import numpy as np

OP_LE, OP_EQ, OP_MOD = 0, 1, 2

try:  # pragma: no cover - exercised through the backend switch
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy versions


def np_eval_atoms(states, coeffs, ops, bounds, mods):
    vals = states @ coeffs.T  # (m, a)
    out = np.empty(vals.shape, dtype=np.bool_)
    le = ops == OP_LE
    eq = ops == OP_EQ
    md = ops == OP_MOD
    out[:, le] = vals[:, le] <= bounds[le]
    out[:, eq] = vals[:, eq] == bounds[eq]
    if md.any():
        out[:, md] = (vals[:, md] - bounds[md]) % mods[md] == 0
    return out


def np_eval_dnf(truth, cube_ptr, cube_atoms):
    m = truth.shape[0]
    res = np.zeros(m, dtype=np.bool_)
    for c in range(len(cube_ptr) - 1):
        idx = cube_atoms[cube_ptr[c]:cube_ptr[c + 1]]
        if len(idx) == 0:
            return np.ones(m, dtype=np.bool_)
        res |= truth[:, idx].all(axis=1)
    return res


def np_ex(ptr, succ, mask):
    """States with some successor in ``mask`` (forward CSR)."""
    n = len(ptr) - 1
    out = np.zeros(n, dtype=np.bool_)
    src = np.repeat(np.arange(n), np.diff(ptr))
    out[src[mask[succ]]] = True
    return out


def np_eu(ptr, succ, a_mask, b_mask):
    """E[a U b] by iterating Z = b | (a & EX Z) to its fixpoint."""
    z = b_mask.copy()
    while True:
        nz = z | (a_mask & np_ex(ptr, succ, z))
        if (nz == z).all():
            return z
        z = nz


def np_eg(ptr, succ, a_mask):
    """EG a over infinite paths: Z = a & EX Z from the top."""
    z = a_mask.copy()
    while True:
        nz = a_mask & np_ex(ptr, succ, z)
        if (nz == z).all():
            return z
        z = nz


# ---------------------------------------------------------------------------
# numba versions

if HAVE_NUMBA:

    @njit(cache=True)
    def nb_eval_atoms(states, coeffs, ops, bounds, mods):
        m, n = states.shape
        a = coeffs.shape[0]
        out = np.empty((m, a), dtype=np.bool_)
        for i in range(m):
            for k in range(a):
                s = 0
                for j in range(n):
                    c = coeffs[k, j]
                    if c != 0:
                        s += c * states[i, j]
                op = ops[k]
                if op == 0:
                    out[i, k] = s <= bounds[k]
                elif op == 1:
                    out[i, k] = s == bounds[k]
                else:
                    out[i, k] = (s - bounds[k]) % mods[k] == 0
        return out

    @njit(cache=True)
    def nb_eval_dnf(truth, cube_ptr, cube_atoms):
        m = truth.shape[0]
        res = np.zeros(m, dtype=np.bool_)
        ncubes = cube_ptr.shape[0] - 1
        for i in range(m):
            for c in range(ncubes):
                ok = True
                for p in range(cube_ptr[c], cube_ptr[c + 1]):
                    if not truth[i, cube_atoms[p]]:
                        ok = False
                        break
                if ok:
                    res[i] = True
                    break
        return res

    @njit(cache=True)
    def nb_ex(ptr, succ, mask):
        n = ptr.shape[0] - 1
        out = np.zeros(n, dtype=np.bool_)
        for i in range(n):
            for p in range(ptr[i], ptr[i + 1]):
                if mask[succ[p]]:
                    out[i] = True
                    break
        return out

    @njit(cache=True)
    def _reverse(ptr, succ):
        n = ptr.shape[0] - 1
        cnt = np.zeros(n + 1, dtype=np.int64)
        for p in range(succ.shape[0]):
            cnt[succ[p] + 1] += 1
        for i in range(n):
            cnt[i + 1] += cnt[i]
        rptr = cnt.copy()
        fill = cnt[:-1].copy()
        pred = np.empty(succ.shape[0], dtype=np.int64)
        for i in range(n):
            for p in range(ptr[i], ptr[i + 1]):
                t = succ[p]
                pred[fill[t]] = i
                fill[t] += 1
        return rptr, pred

    @njit(cache=True)
    def nb_eu(ptr, succ, a_mask, b_mask):
        rptr, pred = _reverse(ptr, succ)
        n = ptr.shape[0] - 1
        z = b_mask.copy()
        stack = np.empty(n, dtype=np.int64)
        top = 0
        for i in range(n):
            if z[i]:
                stack[top] = i
                top += 1
        while top > 0:
            top -= 1
            t = stack[top]
            for p in range(rptr[t], rptr[t + 1]):
                s = pred[p]
                if not z[s] and a_mask[s]:
                    z[s] = True
                    stack[top] = s
                    top += 1
        return z

    @njit(cache=True)
    def nb_eg(ptr, succ, a_mask):
        rptr, pred = _reverse(ptr, succ)
        n = ptr.shape[0] - 1
        z = a_mask.copy()
        live = np.zeros(n, dtype=np.int64)
        for i in range(n):
            if z[i]:
                for p in range(ptr[i], ptr[i + 1]):
                    if z[succ[p]]:
                        live[i] += 1
        stack = np.empty(n, dtype=np.int64)
        top = 0
        for i in range(n):
            if z[i] and live[i] == 0:
                z[i] = False
                stack[top] = i
                top += 1
        while top > 0:
            top -= 1
            t = stack[top]
            for p in range(rptr[t], rptr[t + 1]):
                s = pred[p]
                if z[s]:
                    live[s] -= 1
                    if live[s] == 0:
                        z[s] = False
                        stack[top] = s
                        top += 1
        return z


_NUMPY = {
    "eval_atoms": np_eval_atoms,
    "eval_dnf": np_eval_dnf,
    "ex": np_ex,
    "eu": np_eu,
    "eg": np_eg,
}
_NUMBA = (
    {
        "eval_atoms": nb_eval_atoms,
        "eval_dnf": nb_eval_dnf,
        "ex": nb_ex,
        "eu": nb_eu,
        "eg": nb_eg,
    }
    if HAVE_NUMBA
    else None
)

_active: dict = {}
backend = "numpy"


def use_backend(name: str) -> str:
    """Select ``"numba"`` or ``"numpy"``; returns the previous backend."""
    global backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev = backend
    _active.clear()
    _active.update(_NUMBA if name == "numba" else _NUMPY)
    backend = name
    return prev


def _default() -> str:
    flag = os.environ.get("PREDKIT_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "no", "off") or not HAVE_NUMBA:
        return "numpy"
    return "numba"


use_backend(_default())


def eval_atoms(states, coeffs, ops, bounds, mods):
    return _active["eval_atoms"](states, coeffs, ops, bounds, mods)


def eval_dnf(truth, cube_ptr, cube_atoms):
    return _active["eval_dnf"](truth, cube_ptr, cube_atoms)


def ex(ptr, succ, mask):
    return _active["ex"](ptr, succ, mask)


def eu(ptr, succ, a_mask, b_mask):
    return _active["eu"](ptr, succ, a_mask, b_mask)


def eg(ptr, succ, a_mask):
    return _active["eg"](ptr, succ, a_mask)
