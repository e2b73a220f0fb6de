"""Pure-Python/numpy fallback for the compiled kernels in ``_kernels.pyx``."""
import numpy as np

_CHUNK = 1 << 16


def reversal_histogram_chunk(n, start_plus, lo, hi):
    counts = np.zeros((2 * n + 1, 2, n + 1), dtype=np.int64)
    start = 1 if start_plus else -1
    for base in range(lo, hi, _CHUNK):
        masks = np.arange(base, min(base + _CHUNK, hi), dtype=np.int64)
        cur = np.full(masks.shape, start, dtype=np.int64)
        disp = np.zeros_like(cur)
        rev = np.zeros_like(cur)
        for i in range(n):
            disp += cur
            nxt = np.where((masks >> i) & 1, 1, -1)
            rev += nxt != cur
            cur = nxt
        end = np.where(cur == 1, 0, 1)
        np.add.at(counts, (disp + n, end, rev), 1)
    return counts


def _neighbours(values, periodic):
    """Return (+ amplitudes from the left, - amplitudes from the right)."""
    if periodic:
        return np.roll(values[:, 0], 1), np.roll(values[:, 1], -1)
    from_left = np.zeros_like(values[:, 0])
    from_right = np.zeros_like(values[:, 1])
    from_left[1:] = values[:-1, 0]
    from_right[:-1] = values[1:, 1]
    return from_left, from_right


def step_simple(values, keep, rev, periodic):
    from_left, from_right = _neighbours(values, periodic)
    out = np.empty_like(values)
    out[:, 0] = keep * from_left + rev * from_right
    out[:, 1] = keep * from_right + rev * from_left
    return out


def step_causal(values, keep, up, down, periodic, reverse_sweep=False):
    # reverse_sweep only matters for the compiled loop; sites are independent.
    zp_left, zm_right = _neighbours(values, periodic)
    det = 1.0 - up * down
    rp = keep * zp_left + up * zm_right
    rm = keep * zm_right + down * zp_left
    out = np.empty_like(values)
    out[:, 0] = (rp + down * rm) / det
    out[:, 1] = (rm + up * rp) / det
    return out
