# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled time-stepping kernels.

Mirrors ``_pykernels`` expression-for-expression; the build disables FMA
contraction so results are bit-identical to the pure-Python backend.
"""
from libc.math cimport sqrt, isfinite

cdef enum:
    RK4 = 0
    EULER_MARUYAMA = 1
    MILSTEIN_LITERAL = 2
    MILSTEIN_CORRECTED = 3


cdef struct Params:
    double lam, beta, eta, mu, gamma, alpha
    double s1, s2, s3, s4


cdef inline void _drift(const Params* p, double x, double y, double z,
                        double* fx, double* fy, double* fz) noexcept nogil:
    cdef double bxy = p.beta * x * y
    fx[0] = p.lam + p.eta * z - bxy - p.mu * x
    fy[0] = bxy - (p.alpha + p.mu + p.gamma) * y
    fz[0] = p.gamma * y - (p.eta + p.mu) * z


cdef inline void _rk4(const Params* p, double* s, double h) noexcept nogil:
    cdef double x = s[0], y = s[1], z = s[2]
    cdef double a1, b1, c1, a2, b2, c2, a3, b3, c3, a4, b4, c4
    cdef double hh = 0.5 * h
    _drift(p, x, y, z, &a1, &b1, &c1)
    _drift(p, x + hh * a1, y + hh * b1, z + hh * c1, &a2, &b2, &c2)
    _drift(p, x + hh * a2, y + hh * b2, z + hh * c2, &a3, &b3, &c3)
    _drift(p, x + h * a3, y + h * b3, z + h * c3, &a4, &b4, &c4)
    s[0] = x + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
    s[1] = y + h * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0
    s[2] = z + h * (c1 + 2.0 * c2 + 2.0 * c3 + c4) / 6.0


cdef inline void _stochastic(const Params* p, int scheme, double* s, double h, double sq,
                             double xi1, double xi2, double xi3, double xi4) noexcept nogil:
    cdef double x = s[0], y = s[1], z = s[2]
    cdef double fx, fy, fz, d1, d2, d3, d4, g4, xy, c14, c24
    _drift(p, x, y, z, &fx, &fy, &fz)
    if scheme == EULER_MARUYAMA:
        g4 = p.s4 * x * y * (xi4 * sq)
        s[0] = x + fx * h + p.s1 * x * (xi1 * sq) - g4
        s[1] = y + fy * h + p.s2 * y * (xi2 * sq) + g4
        s[2] = z + fz * h + p.s3 * z * (xi3 * sq)
        return
    d1 = p.s1 * xi1 * sq + 0.5 * p.s1 * p.s1 * (xi1 * xi1 - 1.0) * h
    d2 = p.s2 * xi2 * sq + 0.5 * p.s2 * p.s2 * (xi2 * xi2 - 1.0) * h
    d3 = p.s3 * xi3 * sq + 0.5 * p.s3 * p.s3 * (xi3 * xi3 - 1.0) * h
    xy = x * y
    if scheme == MILSTEIN_LITERAL:
        d4 = p.s4 * xi4 * sq + 0.5 * p.s4 * p.s4 * (xi4 * xi4 - 1.0) * h
        s[0] = x + fx * h + x * d1 + xy * d4
        s[1] = y + fy * h + y * d2 + xy * d4
    else:
        d4 = p.s4 * xi4 * sq + 0.5 * p.s4 * p.s4 * (x - y) * (xi4 * xi4 - 1.0) * h
        c14 = 0.5 * p.s1 * p.s4 * (xi1 * xi4) * h
        c24 = 0.5 * p.s2 * p.s4 * (xi2 * xi4) * h
        s[0] = x + fx * h + x * d1 - xy * (d4 + 2.0 * c14 + c24)
        s[1] = y + fy * h + y * d2 + xy * (d4 + c14 + 2.0 * c24)
    s[2] = z + fz * h + z * d3


def integrate_path(init, params, sig, double dt, double last_dt, Py_ssize_t n_steps,
                   int scheme, bint clamp, double floor, xi, double[:, ::1] out):
    """Same contract as ``_pykernels.integrate_path``."""
    cdef Params p
    p.lam, p.beta, p.eta, p.mu, p.gamma, p.alpha = params
    p.s1, p.s2, p.s3, p.s4 = sig
    if scheme < RK4 or scheme > MILSTEIN_CORRECTED:
        raise ValueError(f"unknown scheme code {scheme}")
    cdef double[:, ::1] noise
    if scheme != RK4:
        noise = xi
        if noise.shape[0] < n_steps or noise.shape[1] != 4:
            raise ValueError("xi must have shape (n_steps, 4)")
    if out.shape[0] < n_steps + 1 or out.shape[1] != 3:
        raise ValueError("out must have shape (n_steps + 1, 3)")

    cdef double s[3]
    s[0], s[1], s[2] = init
    out[0, 0] = s[0]
    out[0, 1] = s[1]
    out[0, 2] = s[2]
    cdef Py_ssize_t ext = 0 if s[1] < floor else -1
    cdef Py_ssize_t nonpos = -1, bad = -1, k
    cdef int nonpos_comp = -1
    cdef double sq = sqrt(dt), h, sh
    with nogil:
        for k in range(n_steps):
            if k == n_steps - 1 and last_dt != dt:
                h = last_dt
                sh = sqrt(last_dt)
            else:
                h = dt
                sh = sq
            if scheme == RK4:
                _rk4(&p, s, h)
            else:
                _stochastic(&p, scheme, s, h, sh,
                            noise[k, 0], noise[k, 1], noise[k, 2], noise[k, 3])
            if not (isfinite(s[0]) and isfinite(s[1]) and isfinite(s[2])):
                bad = k + 1
                break
            if nonpos < 0 and (s[0] <= 0.0 or s[1] <= 0.0 or s[2] <= 0.0):
                nonpos = k + 1
                nonpos_comp = 0 if s[0] <= 0.0 else (1 if s[1] <= 0.0 else 2)
            if clamp:
                if s[0] < 0.0:
                    s[0] = 0.0
                if s[1] < 0.0:
                    s[1] = 0.0
                if s[2] < 0.0:
                    s[2] = 0.0
            if ext < 0 and s[1] < floor:
                ext = k + 1
            out[k + 1, 0] = s[0]
            out[k + 1, 1] = s[1]
            out[k + 1, 2] = s[2]
    if bad >= 0:
        return (1, bad, nonpos, nonpos_comp, ext)
    return (0, -1, nonpos, nonpos_comp, ext)
