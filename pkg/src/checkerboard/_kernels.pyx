# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the lattice module.

Every routine here has a line-for-line counterpart in ``_pykernels``; the two
are interchangeable and selected once in ``checkerboard.backend``.
Column 0 of a field array holds the ``+`` direction, column 1 the ``-``.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef fused scalar:
    double
    double complex


def reversal_histogram_chunk(int n, bint start_plus, long long lo, long long hi):
    """Count paths with direction bitmasks in ``[lo, hi)``.

    Bit ``i`` of a mask is the direction (1 = ``+``) held after step ``i``.
    Returns int64 counts indexed ``[displacement + n, end_dir, reversals]``
    with ``end_dir`` 0 for ``+`` and 1 for ``-``.
    """
    counts = np.zeros((2 * n + 1, 2, n + 1), dtype=np.int64)
    cdef long long[:, :, ::1] c = counts
    cdef long long mask
    cdef int i, cur, nxt, disp, rev
    with nogil:
        for mask in range(lo, hi):
            cur = 1 if start_plus else -1
            disp = 0
            rev = 0
            for i in range(n):
                disp += cur
                nxt = 1 if (mask >> i) & 1 else -1
                if nxt != cur:
                    rev += 1
                cur = nxt
            c[disp + n, 0 if cur == 1 else 1, rev] += 1
    return counts


def step_simple(const scalar[:, ::1] values, scalar keep, scalar rev, bint periodic):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t x, left, right
    cdef scalar from_left, from_right
    out = np.zeros_like(np.asarray(values))
    cdef scalar[:, ::1] o = out
    with nogil:
        for x in range(n):
            left = x - 1
            right = x + 1
            if periodic:
                if left < 0:
                    left = n - 1
                if right >= n:
                    right = 0
            # + mover arriving from the left, - mover arriving from the right
            from_left = values[left, 0] if 0 <= left < n else 0
            from_right = values[right, 1] if 0 <= right < n else 0
            o[x, 0] = keep * from_left + rev * from_right
            o[x, 1] = keep * from_right + rev * from_left
    return out


def step_causal(const scalar[:, ::1] values, double keep, double up, double down,
                bint periodic, bint reverse_sweep=False):
    """Advance forward-time amplitudes one step with the per-site 2x2 solve.

    ``up`` and ``down`` are the reversal weights toward larger and smaller z.
    """
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t k, x, left, right
    cdef scalar zp_left, zm_right, rp, rm
    cdef double det = 1.0 - up * down
    out = np.zeros_like(np.asarray(values))
    cdef scalar[:, ::1] o = out
    with nogil:
        for k in range(n):
            x = n - 1 - k if reverse_sweep else k
            left = x - 1
            right = x + 1
            if periodic:
                if left < 0:
                    left = n - 1
                if right >= n:
                    right = 0
            zp_left = values[left, 0] if 0 <= left < n else 0
            zm_right = values[right, 1] if 0 <= right < n else 0
            rp = keep * zp_left + up * zm_right
            rm = keep * zm_right + down * zp_left
            o[x, 0] = (rp + down * rm) / det
            o[x, 1] = (rm + up * rp) / det
    return out
