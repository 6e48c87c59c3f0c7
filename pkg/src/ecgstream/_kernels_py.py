"""Pure-Python/scipy fallback for the compiled streaming kernels.

Same interface and same chunking-invariance guarantee as the compiled
module: lfilter/sosfilt advance a per-sample recurrence, so continuing
from saved state is bit-identical to one whole-signal call.  Outputs may
differ from the compiled backend in the last few ulps (different
accumulation order), never in behaviour.
"""

import numpy as np
from scipy.signal import lfilter, sosfilt

name = "pure"


def fir_init(taps):
    return np.zeros(max(len(taps) - 1, 0), dtype=np.float64)


def fir_push(taps, state, x):
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    taps = np.asarray(taps, dtype=np.float64)
    if taps.size == 1:
        return taps[0] * x
    # a = [1, 0] forces the per-sample DF2T C path; scipy's pure-FIR shortcut
    # (np.convolve + zi add) splits sums differently at chunk boundaries and
    # would break bit-exact chunking invariance
    y, zf = lfilter(taps, [1.0, 0.0], x, zi=state)
    state[:] = zf
    return y


def sos_init(sos):
    return np.zeros((len(sos), 2), dtype=np.float64)


def sos_push(sos, state, x):
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    y, zf = sosfilt(sos, x, zi=state)
    state[:] = zf
    return y


def runmax_init():
    return np.zeros(1, dtype=np.float64)


def runmax_push(state, lam, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    m = state[0]
    for i in range(x.shape[0]):
        v = x[i]
        a = abs(v)
        m = lam * m
        if a > m:
            m = a
        out[i] = 0.0 if m == 0.0 else v / m
    state[0] = m
    return out
