"""Independent high-precision geodesy oracle used to freeze expected values.

Distances use the 3-D unit-vector angle atan2(|a x b|, a . b); bearings use
the tangent-plane projection of the destination vector. Neither matches the
closed forms used in the library, which is the point.
"""
from mpmath import mp, mpf, cos, sin, atan2, sqrt, pi, degrees

mp.dps = 40
R = mpf(6371000)


def unit(lat, lon):
    la, lo = mpf(lat) * pi / 180, mpf(lon) * pi / 180
    return (cos(la) * cos(lo), cos(la) * sin(lo), sin(la))


def dist(p, q):
    a, b = unit(*p), unit(*q)
    cx = a[1] * b[2] - a[2] * b[1]
    cy = a[2] * b[0] - a[0] * b[2]
    cz = a[0] * b[1] - a[1] * b[0]
    dot = sum(x * y for x, y in zip(a, b))
    return R * atan2(sqrt(cx * cx + cy * cy + cz * cz), dot)


def bearing(p, q):
    la, lo = mpf(p[0]) * pi / 180, mpf(p[1]) * pi / 180
    north = (-sin(la) * cos(lo), -sin(la) * sin(lo), cos(la))
    east = (-sin(lo), cos(lo), 0)
    b = unit(*q)
    y = sum(x * z for x, z in zip(b, east))
    x = sum(x * z for x, z in zip(b, north))
    deg = degrees(atan2(y, x))
    return deg % 360


def write_pairs(path, n, seed):
    import random

    rng = random.Random(seed)
    with open(path, "w") as out:
        for i in range(n):
            if i % 2 == 0:
                p = (rng.uniform(-89, 89), rng.uniform(-180, 180))
                q = (rng.uniform(-89, 89), rng.uniform(-180, 180))
            else:
                # city-scale pairs
                p = (rng.uniform(-60, 60), rng.uniform(-179, 179))
                q = (p[0] + rng.uniform(-0.2, 0.2), p[1] + rng.uniform(-0.2, 0.2))
            if p == q:
                continue
            out.write("%r,%r,%r,%r,%s,%s\n" % (p[0], p[1], q[0], q[1],
                                                mp.nstr(dist(p, q), 25), mp.nstr(bearing(p, q), 25)))


if __name__ == "__main__":
    import sys

    if len(sys.argv) == 4:
        write_pairs(sys.argv[1], int(sys.argv[2]), int(sys.argv[3]))
        sys.exit(0)
    print("dist (0,0)-(0,1)        ", mp.nstr(dist((0, 0), (0, 1)), 20))
    print("dist christchurch pair  ", mp.nstr(dist((-43.5103, 172.6318), (-43.5321, 172.6362)), 20))
    print("bearing (10,10)-(11,11) ", mp.nstr(bearing((10, 10), (11, 11)), 20))
    print("bearing christchurch    ", mp.nstr(bearing((-43.5103, 172.6318), (-43.5321, 172.6362)), 20))
    print("30 mph km/h             ", mp.nstr(mpf(30) * mpf("1.609344"), 10))
