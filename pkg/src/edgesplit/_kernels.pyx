# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot inner loops.

Operation order mirrors edgesplit._kernels_py exactly so both backends
produce the same floating-point results.
"""

from libc.math cimport exp, isfinite


def rect_energy(double[:] t, double[:] p):
    """Left-rectangle integral: sum of p[i] * (t[i+1] - t[i])."""
    cdef double total = 0.0
    cdef Py_ssize_t i, n = t.shape[0]
    for i in range(n - 1):
        total += p[i] * (t[i + 1] - t[i])
    return total


def first_nonincreasing(double[:] t):
    """Index of the first timestamp not strictly greater than its
    predecessor, or -1 when the sequence is strictly increasing."""
    cdef Py_ssize_t i, n = t.shape[0]
    for i in range(1, n):
        if t[i] <= t[i - 1]:
            return i
    return -1


def first_negative(double[:] p):
    """Index of the first negative value, or -1 when all are >= 0."""
    cdef Py_ssize_t i, n = p.shape[0]
    for i in range(n):
        if p[i] < 0.0:
            return i
    return -1


def quad_design_sums(double[:] x, double[:] y):
    """Moment sums for the 3x3 least-squares normal equations of
    a*x^2 + b*x + c: returns (sx1, sx2, sx3, sx4, sy, sxy, sx2y)."""
    cdef double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0
    cdef double t0 = 0.0, t1 = 0.0, t2 = 0.0
    cdef double xi, yi, xx
    cdef Py_ssize_t i, n = x.shape[0]
    for i in range(n):
        xi = x[i]
        yi = y[i]
        xx = xi * xi
        s1 += xi
        s2 += xx
        s3 += xx * xi
        s4 += xx * xx
        t0 += yi
        t1 += xi * yi
        t2 += xx * yi
    return s1, s2, s3, s4, t0, t1, t2


def quad_sse(double[:] x, double[:] y, double a, double b, double c):
    """Sum of squared residuals of y against a*x^2 + b*x + c."""
    cdef double sse = 0.0
    cdef double xi, d
    cdef Py_ssize_t i, n = x.shape[0]
    for i in range(n):
        xi = x[i]
        d = y[i] - (a * xi * xi + b * xi + c)
        sse += d * d
    return sse


def exp_solve_at_rate(double[:] x, double[:] y, double rate):
    """Best (amp, floor) of floor + amp*exp(-rate*x) for a fixed rate.

    Closed-form 2x2 least squares in the basis [exp(-rate*x), 1].
    Returns (amp, floor, sse); collapses to the flat fit (amp=0) when the
    basis is numerically degenerate at this rate.
    """
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double se = 0.0, see = 0.0, sy = 0.0, sye = 0.0
    cdef double e, yi, d, mean, sse
    for i in range(n):
        e = exp(-rate * x[i])
        yi = y[i]
        se += e
        see += e * e
        sy += yi
        sye += yi * e
    cdef double det = n * see - se * se
    if not (det > 0.0) or not isfinite(det) or det < n * see * 1e-15:
        mean = sy / n
        sse = 0.0
        for i in range(n):
            d = y[i] - mean
            sse += d * d
        return 0.0, mean, sse
    cdef double amp = (n * sye - se * sy) / det
    cdef double floor = (sy * see - se * sye) / det
    sse = 0.0
    for i in range(n):
        d = y[i] - (floor + amp * exp(-rate * x[i]))
        sse += d * d
    return amp, floor, sse


def spin(long long iterations):
    """CPU-bound busy loop; the arithmetic keeps the loop un-foldable."""
    cdef double acc = 0.0
    cdef long long i
    for i in range(iterations):
        acc = (acc + 1.1) * 0.731
    return acc
