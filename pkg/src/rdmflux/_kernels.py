"""Hot inner loops for classical orbit integration.

Each kernel is written as a plain Python function over scalars/arrays and
compiled with numba when available. Set RDMFLUX_NUMBA=0 to force the
interpreted fallback (same source, so results agree to round-off); the
selected backend is reported by backend(). benchmarks/bench_kernels.py
times both paths.

Kernels are self-contained (no cross-calls) so each compiles in isolation.
"""

import math
import os

import numpy as np

TWO_PI = 2.0 * math.pi

# 4th-order Yoshida composition weights for symmetric splitting
_CBRT2 = 2.0 ** (1.0 / 3.0)
YOSHIDA_W1 = 1.0 / (2.0 - _CBRT2)
YOSHIDA_W0 = -_CBRT2 / (2.0 - _CBRT2)


def _standard_map_orbit(q0, p0, kick, tau, steps):
    out = np.empty((steps + 1, 2))
    q = q0 % TWO_PI
    p = p0 % TWO_PI
    out[0, 0] = q
    out[0, 1] = p
    for k in range(steps):
        p = (p + kick * math.sin(q)) % TWO_PI
        q = (q + tau * p) % TWO_PI
        out[k + 1, 0] = q
        out[k + 1, 1] = p
    return out


def _coupled_rotor_orbit(q1, p1, q2, p2, kick1, kick2, tau, coupling, steps):
    out = np.empty((steps + 1, 4))
    a, b = q1 % TWO_PI, p1 % TWO_PI
    c, d = q2 % TWO_PI, p2 % TWO_PI
    out[0, 0], out[0, 1], out[0, 2], out[0, 3] = a, b, c, d
    for k in range(steps):
        b = (b + tau * (kick1 * math.sin(a) - coupling * math.cos(a) * math.sin(c))) % TWO_PI
        d = (d + tau * (kick2 * math.sin(c) - coupling * math.cos(c) * math.sin(a))) % TWO_PI
        a = (a + tau * b) % TWO_PI
        c = (c + tau * d) % TWO_PI
        out[k + 1, 0], out[k + 1, 1], out[k + 1, 2], out[k + 1, 3] = a, b, c, d
    return out


def _harper_flow_orbit(q1, p1, q2, p2, gamma1, gamma2, coupling,
                       pos_period, mom_period, dt, steps):
    # 4th-order Yoshida composition of exact Strang sub-steps for
    # H = gamma1*(cos(wp*p1)+cos(wp*p2)) + gamma2*(cos(wq*q1)+cos(wq*q2))
    #     + coupling*sin(wq*q1)*sin(wq*q2)
    wq = TWO_PI / pos_period
    wp = TWO_PI / mom_period
    cbrt2 = 2.0 ** (1.0 / 3.0)
    w1 = 1.0 / (2.0 - cbrt2)
    w0 = -cbrt2 / (2.0 - cbrt2)
    out = np.empty((steps + 1, 4))
    a, b = q1 % pos_period, p1 % mom_period
    c, d = q2 % pos_period, p2 % mom_period
    out[0, 0], out[0, 1], out[0, 2], out[0, 3] = a, b, c, d
    for k in range(steps):
        for sub in range(3):
            if sub == 1:
                h = w0 * dt
            else:
                h = w1 * dt
            half = 0.5 * h
            a = a - half * gamma1 * wp * math.sin(wp * b)
            c = c - half * gamma1 * wp * math.sin(wp * d)
            b = b + h * wq * (gamma2 * math.sin(wq * a)
                              - coupling * math.cos(wq * a) * math.sin(wq * c))
            d = d + h * wq * (gamma2 * math.sin(wq * c)
                              - coupling * math.cos(wq * c) * math.sin(wq * a))
            a = a - half * gamma1 * wp * math.sin(wp * b)
            c = c - half * gamma1 * wp * math.sin(wp * d)
        a %= pos_period
        c %= pos_period
        b %= mom_period
        d %= mom_period
        out[k + 1, 0], out[k + 1, 1], out[k + 1, 2], out[k + 1, 3] = a, b, c, d
    return out


def _benettin_standard_map(q0, p0, kick, tau, steps, delta0):
    # largest Lyapunov exponent per iteration, twin-trajectory renormalization
    qa = q0 % TWO_PI
    pa = p0 % TWO_PI
    qb = (qa + delta0) % TWO_PI
    pb = pa
    acc = 0.0
    for k in range(steps):
        pa = (pa + kick * math.sin(qa)) % TWO_PI
        qa = (qa + tau * pa) % TWO_PI
        pb = (pb + kick * math.sin(qb)) % TWO_PI
        qb = (qb + tau * pb) % TWO_PI
        dq = qb - qa
        if dq > math.pi:
            dq -= TWO_PI
        elif dq < -math.pi:
            dq += TWO_PI
        dp = pb - pa
        if dp > math.pi:
            dp -= TWO_PI
        elif dp < -math.pi:
            dp += TWO_PI
        dist = math.sqrt(dq * dq + dp * dp)
        acc += math.log(dist / delta0)
        scale = delta0 / dist
        qb = (qa + dq * scale) % TWO_PI
        pb = (pa + dp * scale) % TWO_PI
    return acc / steps


def _benettin_coupled_rotor(q1, p1, q2, p2, kick1, kick2, tau, coupling,
                            steps, delta0):
    a1, b1, c1, d1 = q1 % TWO_PI, p1 % TWO_PI, q2 % TWO_PI, p2 % TWO_PI
    a2 = (a1 + delta0) % TWO_PI
    b2, c2, d2 = b1, c1, d1
    acc = 0.0
    for k in range(steps):
        b1 = (b1 + tau * (kick1 * math.sin(a1) - coupling * math.cos(a1) * math.sin(c1))) % TWO_PI
        d1 = (d1 + tau * (kick2 * math.sin(c1) - coupling * math.cos(c1) * math.sin(a1))) % TWO_PI
        a1 = (a1 + tau * b1) % TWO_PI
        c1 = (c1 + tau * d1) % TWO_PI
        b2 = (b2 + tau * (kick1 * math.sin(a2) - coupling * math.cos(a2) * math.sin(c2))) % TWO_PI
        d2 = (d2 + tau * (kick2 * math.sin(c2) - coupling * math.cos(c2) * math.sin(a2))) % TWO_PI
        a2 = (a2 + tau * b2) % TWO_PI
        c2 = (c2 + tau * d2) % TWO_PI
        dist = 0.0
        da = a2 - a1
        if da > math.pi:
            da -= TWO_PI
        elif da < -math.pi:
            da += TWO_PI
        db = b2 - b1
        if db > math.pi:
            db -= TWO_PI
        elif db < -math.pi:
            db += TWO_PI
        dc = c2 - c1
        if dc > math.pi:
            dc -= TWO_PI
        elif dc < -math.pi:
            dc += TWO_PI
        dd = d2 - d1
        if dd > math.pi:
            dd -= TWO_PI
        elif dd < -math.pi:
            dd += TWO_PI
        dist = math.sqrt(da * da + db * db + dc * dc + dd * dd)
        acc += math.log(dist / delta0)
        scale = delta0 / dist
        a2 = (a1 + da * scale) % TWO_PI
        b2 = (b1 + db * scale) % TWO_PI
        c2 = (c1 + dc * scale) % TWO_PI
        d2 = (d1 + dd * scale) % TWO_PI
    return acc / steps


def _benettin_harper_flow(q1, p1, q2, p2, gamma1, gamma2, coupling,
                          pos_period, mom_period, dt, steps, delta0):
    wq = TWO_PI / pos_period
    wp = TWO_PI / mom_period
    cbrt2 = 2.0 ** (1.0 / 3.0)
    w1 = 1.0 / (2.0 - cbrt2)
    w0 = -cbrt2 / (2.0 - cbrt2)
    hq = 0.5 * pos_period
    hp = 0.5 * mom_period
    a1, b1 = q1 % pos_period, p1 % mom_period
    c1, d1 = q2 % pos_period, p2 % mom_period
    a2 = (a1 + delta0) % pos_period
    b2, c2, d2 = b1, c1, d1
    acc = 0.0
    for k in range(steps):
        for sub in range(3):
            if sub == 1:
                h = w0 * dt
            else:
                h = w1 * dt
            half = 0.5 * h
            a1 = a1 - half * gamma1 * wp * math.sin(wp * b1)
            c1 = c1 - half * gamma1 * wp * math.sin(wp * d1)
            b1 = b1 + h * wq * (gamma2 * math.sin(wq * a1)
                                - coupling * math.cos(wq * a1) * math.sin(wq * c1))
            d1 = d1 + h * wq * (gamma2 * math.sin(wq * c1)
                                - coupling * math.cos(wq * c1) * math.sin(wq * a1))
            a1 = a1 - half * gamma1 * wp * math.sin(wp * b1)
            c1 = c1 - half * gamma1 * wp * math.sin(wp * d1)
            a2 = a2 - half * gamma1 * wp * math.sin(wp * b2)
            c2 = c2 - half * gamma1 * wp * math.sin(wp * d2)
            b2 = b2 + h * wq * (gamma2 * math.sin(wq * a2)
                                - coupling * math.cos(wq * a2) * math.sin(wq * c2))
            d2 = d2 + h * wq * (gamma2 * math.sin(wq * c2)
                                - coupling * math.cos(wq * c2) * math.sin(wq * a2))
            a2 = a2 - half * gamma1 * wp * math.sin(wp * b2)
            c2 = c2 - half * gamma1 * wp * math.sin(wp * d2)
        a1 %= pos_period
        c1 %= pos_period
        b1 %= mom_period
        d1 %= mom_period
        a2 %= pos_period
        c2 %= pos_period
        b2 %= mom_period
        d2 %= mom_period
        da = a2 - a1
        if da > hq:
            da -= pos_period
        elif da < -hq:
            da += pos_period
        db = b2 - b1
        if db > hp:
            db -= mom_period
        elif db < -hp:
            db += mom_period
        dc = c2 - c1
        if dc > hq:
            dc -= pos_period
        elif dc < -hq:
            dc += pos_period
        dd = d2 - d1
        if dd > hp:
            dd -= mom_period
        elif dd < -hp:
            dd += mom_period
        dist = math.sqrt(da * da + db * db + dc * dc + dd * dd)
        acc += math.log(dist / delta0)
        scale = delta0 / dist
        a2 = (a1 + da * scale) % pos_period
        b2 = (b1 + db * scale) % mom_period
        c2 = (c1 + dc * scale) % pos_period
        d2 = (d1 + dd * scale) % mom_period
    return acc / (steps * dt)


PY_IMPLS = {
    "standard_map_orbit": _standard_map_orbit,
    "coupled_rotor_orbit": _coupled_rotor_orbit,
    "harper_flow_orbit": _harper_flow_orbit,
    "benettin_standard_map": _benettin_standard_map,
    "benettin_coupled_rotor": _benettin_coupled_rotor,
    "benettin_harper_flow": _benettin_harper_flow,
}

USE_NUMBA = os.environ.get("RDMFLUX_NUMBA", "1") != "0"
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:
        USE_NUMBA = False

if USE_NUMBA:
    _impls = {name: njit(cache=True)(fn) for name, fn in PY_IMPLS.items()}
else:
    _impls = PY_IMPLS

standard_map_orbit = _impls["standard_map_orbit"]
coupled_rotor_orbit = _impls["coupled_rotor_orbit"]
harper_flow_orbit = _impls["harper_flow_orbit"]
benettin_standard_map = _impls["benettin_standard_map"]
benettin_coupled_rotor = _impls["benettin_coupled_rotor"]
benettin_harper_flow = _impls["benettin_harper_flow"]


def backend() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return "numba" if USE_NUMBA else "numpy"
