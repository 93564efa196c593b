"""Pure-Python time-stepping kernels.

This is the fallback used when the compiled ``_ckernels`` extension is not
available, and the reference it is tested against. Expression order here is
mirrored exactly in ``_ckernels.pyx`` so both backends are bit-identical;
change one, change the other.
"""
from __future__ import annotations

import math

RK4 = 0
EULER_MARUYAMA = 1
MILSTEIN_LITERAL = 2
MILSTEIN_CORRECTED = 3

# status codes returned by integrate_path
OK = 0
NONFINITE = 1


def drift3(x, y, z, lam, beta, eta, mu, gamma, alpha):
    bxy = beta * x * y
    return (lam + eta * z - bxy - mu * x,
            bxy - (alpha + mu + gamma) * y,
            gamma * y - (eta + mu) * z)


def rk4(x, y, z, lam, beta, eta, mu, gamma, alpha, h):
    a1, b1, c1 = drift3(x, y, z, lam, beta, eta, mu, gamma, alpha)
    hh = 0.5 * h
    a2, b2, c2 = drift3(x + hh * a1, y + hh * b1, z + hh * c1, lam, beta, eta, mu, gamma, alpha)
    a3, b3, c3 = drift3(x + hh * a2, y + hh * b2, z + hh * c2, lam, beta, eta, mu, gamma, alpha)
    a4, b4, c4 = drift3(x + h * a3, y + h * b3, z + h * c3, lam, beta, eta, mu, gamma, alpha)
    return (x + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0,
            y + h * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0,
            z + h * (c1 + 2.0 * c2 + 2.0 * c3 + c4) / 6.0)


def euler_maruyama(x, y, z, lam, beta, eta, mu, gamma, alpha,
                   s1, s2, s3, s4, h, sq, xi1, xi2, xi3, xi4):
    fx, fy, fz = drift3(x, y, z, lam, beta, eta, mu, gamma, alpha)
    g4 = s4 * x * y * (xi4 * sq)
    return (x + fx * h + s1 * x * (xi1 * sq) - g4,
            y + fy * h + s2 * y * (xi2 * sq) + g4,
            z + fz * h + s3 * z * (xi3 * sq))


def milstein_literal(x, y, z, lam, beta, eta, mu, gamma, alpha,
                   s1, s2, s3, s4, h, sq, xi1, xi2, xi3, xi4):
    # Literal variant: the σ4 bracket is *added* to both X and Y (the SDE has
    # -σ4 in X), and its correction multiplies XY.
    fx, fy, fz = drift3(x, y, z, lam, beta, eta, mu, gamma, alpha)
    d1 = s1 * xi1 * sq + 0.5 * s1 * s1 * (xi1 * xi1 - 1.0) * h
    d2 = s2 * xi2 * sq + 0.5 * s2 * s2 * (xi2 * xi2 - 1.0) * h
    d3 = s3 * xi3 * sq + 0.5 * s3 * s3 * (xi3 * xi3 - 1.0) * h
    d4 = s4 * xi4 * sq + 0.5 * s4 * s4 * (xi4 * xi4 - 1.0) * h
    xy = x * y
    return (x + fx * h + x * d1 + xy * d4,
            y + fy * h + y * d2 + xy * d4,
            z + fz * h + z * d3)


def milstein_corrected(x, y, z, lam, beta, eta, mu, gamma, alpha,
                       s1, s2, s3, s4, h, sq, xi1, xi2, xi3, xi4):
    # σ4 column g4 = σ4·xy·(-1, 1, 0); (g4·∇)g4 = σ4²·xy·(x - y)·(-1, 1, 0).
    # Mixed pairs use I_jk ≈ ½ΔW_jΔW_k (Lévy areas dropped):
    #   L1g4 + L4g1 = σ1σ4·xy·(-2, 1, 0),  L2g4 + L4g2 = σ2σ4·xy·(-1, 2, 0).
    fx, fy, fz = drift3(x, y, z, lam, beta, eta, mu, gamma, alpha)
    d1 = s1 * xi1 * sq + 0.5 * s1 * s1 * (xi1 * xi1 - 1.0) * h
    d2 = s2 * xi2 * sq + 0.5 * s2 * s2 * (xi2 * xi2 - 1.0) * h
    d3 = s3 * xi3 * sq + 0.5 * s3 * s3 * (xi3 * xi3 - 1.0) * h
    e4 = s4 * xi4 * sq + 0.5 * s4 * s4 * (x - y) * (xi4 * xi4 - 1.0) * h
    c14 = 0.5 * s1 * s4 * (xi1 * xi4) * h
    c24 = 0.5 * s2 * s4 * (xi2 * xi4) * h
    xy = x * y
    return (x + fx * h + x * d1 - xy * (e4 + 2.0 * c14 + c24),
            y + fy * h + y * d2 + xy * (e4 + c14 + 2.0 * c24),
            z + fz * h + z * d3)


_STOCHASTIC = {
    EULER_MARUYAMA: euler_maruyama,
    MILSTEIN_LITERAL: milstein_literal,
    MILSTEIN_CORRECTED: milstein_corrected,
}


def integrate_path(init, params, sig, dt, last_dt, n_steps, scheme, clamp, floor, xi, out):
    """Advance ``init`` by ``n_steps`` steps, writing states into ``out``.

    ``xi`` has shape (n_steps, 4) for stochastic schemes and is ignored for
    RK4. The final step uses ``last_dt``. Returns
    ``(status, bad_index, nonpos_index, nonpos_component, extinct_index)``
    with -1 meaning "did not happen"; indices refer to rows of ``out``.
    """
    lam, beta, eta, mu, gamma, alpha = params
    s1, s2, s3, s4 = sig
    x, y, z = init
    out[0, 0], out[0, 1], out[0, 2] = x, y, z
    ext = 0 if y < floor else -1
    nonpos = -1
    nonpos_comp = -1
    sq = math.sqrt(dt)
    isfinite = math.isfinite
    rows = []
    if scheme == RK4:
        stepper = None
    else:
        stepper = _STOCHASTIC[scheme]
        noise = xi.tolist()
    for k in range(n_steps):
        if k == n_steps - 1 and last_dt != dt:
            h, sh = last_dt, math.sqrt(last_dt)
        else:
            h, sh = dt, sq
        if stepper is None:
            x, y, z = rk4(x, y, z, lam, beta, eta, mu, gamma, alpha, h)
        else:
            r = noise[k]
            x, y, z = stepper(x, y, z, lam, beta, eta, mu, gamma, alpha,
                              s1, s2, s3, s4, h, sh, r[0], r[1], r[2], r[3])
        if not (isfinite(x) and isfinite(y) and isfinite(z)):
            if rows:
                out[1:k + 1] = rows
            return (NONFINITE, k + 1, nonpos, nonpos_comp, ext)
        if nonpos < 0 and (x <= 0.0 or y <= 0.0 or z <= 0.0):
            nonpos = k + 1
            nonpos_comp = 0 if x <= 0.0 else (1 if y <= 0.0 else 2)
        if clamp:
            if x < 0.0:
                x = 0.0
            if y < 0.0:
                y = 0.0
            if z < 0.0:
                z = 0.0
        if ext < 0 and y < floor:
            ext = k + 1
        rows.append((x, y, z))
    if rows:
        out[1:] = rows
    return (OK, -1, nonpos, nonpos_comp, ext)
