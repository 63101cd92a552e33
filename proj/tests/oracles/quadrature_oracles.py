"""Independent reference values frozen into the C++ unit tests.

Run with python3; uses mpmath at 30 digits and scipy dblquad in Cartesian
coordinates, so nothing is shared with the C++ polar quadrature.
"""
import math

import mpmath as mp

mp.mp.dps = 30


def q1(z, alpha=0.5, eta=1.0):
    z = abs(z)
    return 0 if z == 0 or z > eta else z ** (-1 - alpha)


def mass_additive_ball_1d(a, alpha=0.5):
    # int min(q(z), q(z + a)) dz, split at the kinks.
    f = lambda z: min(q1(z, alpha), q1(z + a, alpha))
    pts = [-1 - a, -1, -a, -a / 2, 0, 1 - a, 1]
    pts = sorted(set(p for p in pts if -1 <= p <= 1))
    return mp.quad(lambda z: f(mp.mpf(z)), pts)


def pushforward_sides_additive(a, h, alpha=0.5):
    mu = lambda z: min(q1(z, alpha), q1(z + a, alpha))
    mu_inv = lambda z: min(q1(z, alpha), q1(z - a, alpha))
    pts = sorted(set([-1 - a, -1, -1 + a, -a, -a / 2, 0, a / 2, a, 1 - a, 1, 1 + a]))
    pts = [p for p in pts if -1 <= p <= 1]
    lhs = mp.quad(lambda z: h(z + a) * mu(z), pts)
    rhs = mp.quad(lambda z: h(z) * mu_inv(z), pts)
    return lhs, rhs


def pushforward_sides_multiplicative(x, y, kappa, h, alpha=0.5):
    sx, sy = 2 + mp.sin(x), 2 + mp.sin(y)
    c = (x - y) if abs(x - y) <= kappa else kappa * mp.sign(x - y)
    m, v = sx / sy, c / sy
    mi, vi = sy / sx, -c / sx
    mu = lambda z: min(q1(z, alpha), q1(m * z + v, alpha) * m)
    mu_inv = lambda z: min(q1(z, alpha), q1(mi * z + vi, alpha) / m)
    k = m ** (1 / (1 + alpha))
    cand = [-1, 0, 1, -v / m, (1 - v) / m, (-1 - v) / m, -vi / mi, (1 - vi) / mi, (-1 - vi) / mi,
            v / (k - m), -v / (k + m), vi / (1 / k - mi), -vi / (1 / k + mi)]
    pts = sorted(set(float(p) for p in cand if -1 <= p <= 1))
    lhs = mp.quad(lambda z: h(m * z + v) * mu(z), pts)
    rhs = mp.quad(lambda z: h(z) * mu_inv(z), pts)
    return lhs, rhs


def halfslab_compensator_2d(delta=0.1, alpha=0.5):
    # -int_{delta<|z|<=1, 0<z1<=1} z1 |z|^{-2-alpha} dz as an iterated
    # Cartesian integral with the annulus boundaries resolved per column.
    g = lambda z1, z2: z1 * (z1 * z1 + z2 * z2) ** (-1 - alpha / 2)

    def column(z1):
        top = mp.sqrt(1 - z1 * z1)
        if z1 >= delta:
            return 2 * mp.quad(lambda z2: g(z1, z2), [0, top])
        bottom = mp.sqrt(delta * delta - z1 * z1)
        return 2 * mp.quad(lambda z2: g(z1, z2), [bottom, top])

    return -mp.quad(column, [0, delta, 1])


def generator_cos_1d(x, scale_fn, alpha=0.5):
    # L cos at x with b = 0 and sigma(x) = scale_fn(x); Ball support eta = 1.
    s = scale_fn(x)
    f = lambda z: (mp.cos(x + s * z) - mp.cos(x) + mp.sin(x) * s * z) * abs(z) ** (-1 - alpha)
    return mp.quad(f, [-1, 0, 1])


if __name__ == "__main__":
    print("mass a=0.1", mass_additive_ball_1d(0.1))
    for a in (0.1, 0.05, 0.025):
        print("mass a=%g" % a, mass_additive_ball_1d(a))
    print("pushforward h=z a=0.1", pushforward_sides_additive(0.1, lambda z: z))
    print("pushforward cos mult x=0.3 y=-0.4", pushforward_sides_multiplicative(mp.mpf('0.3'), mp.mpf('-0.4'), 1, mp.cos))
    print("halfslab compensator", halfslab_compensator_2d())
    print("closed form", -2 * 2 * (1 - math.sqrt(0.1)))
    print("L cos additive x=0.3", generator_cos_1d(mp.mpf('0.3'), lambda x: 1))
    print("L cos mult x=0.3", generator_cos_1d(mp.mpf('0.3'), lambda x: 2 + mp.sin(x)))
    print("coalesce term a=0.2 f=r", -0.1 * mass_additive_ball_1d(0.2))
