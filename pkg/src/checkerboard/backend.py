"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback
takes over. Set ``CHECKERBOARD_BACKEND=python`` to force the fallback.
"""
import os
from concurrent.futures import ThreadPoolExecutor

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("CHECKERBOARD_BACKEND", "").lower() != "python":
    kernels = compiled_kernels
    NAME = "compiled"
else:
    kernels = python_kernels
    NAME = "python"


def thread_count():
    """Worker cap from ``CHECKERBOARD_THREADS`` (0 or unset means cpu count)."""
    raw = os.environ.get("CHECKERBOARD_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"CHECKERBOARD_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("CHECKERBOARD_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def reversal_histogram(n, start_plus, impl=None, threads=None):
    """Full path histogram over all ``2**n`` direction sequences.

    The mask range is split into contiguous chunks; integer counts make the
    reduction exact, so the result does not depend on the thread count.
    """
    impl = impl or kernels
    total = 1 << n
    threads = max(1, min(threads or thread_count(), total >> 12 or 1))
    if threads == 1:
        return impl.reversal_histogram_chunk(n, start_plus, 0, total)
    edges = [total * k // threads for k in range(threads + 1)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda k: impl.reversal_histogram_chunk(n, start_plus, edges[k], edges[k + 1]),
                              range(threads)))
    out = parts[0]
    for part in parts[1:]:
        out = out + part
    return out
