"""Numeric wp against its coth degeneration and a Jacobi sn representation."""

import mpmath

from briotbouquet.verify import wp_eval

mpmath.mp.dps = 40
d = mpmath.mpf(2)
print("g2 = 3 d^2, g3 = -d^3 with d = 2")
for x in (mpmath.mpf("0.3"), mpmath.mpc("0.7", "0.2"), mpmath.mpf("1.4")):
    wp, _ = wp_eval(3 * d ** 2, -d ** 3, x)
    ref = -d + mpmath.mpf(3) / 2 * d * mpmath.coth(mpmath.sqrt(3 * d / 2) * x) ** 2
    print(f"  x = {mpmath.nstr(x, 5):>14}   wp = {mpmath.nstr(wp, 20):>45}   |diff| = {mpmath.nstr(abs(wp - ref), 3)}")

e1, e2 = mpmath.mpf(2), mpmath.mpf("0.5")
e3 = -e1 - e2
g2 = -4 * (e1 * e2 + e1 * e3 + e2 * e3)
g3 = 4 * e1 * e2 * e3
print(f"\nthree real roots {e1}, {e2}, {e3}")
for x in (mpmath.mpf("0.25"), mpmath.mpc("0.5", "0.4")):
    wp, _ = wp_eval(g2, g3, x)
    sn = mpmath.ellipfun("sn", mpmath.sqrt(e1 - e3) * x, m=(e2 - e3) / (e1 - e3))
    ref = e3 + (e1 - e3) / sn ** 2
    print(f"  x = {mpmath.nstr(x, 5):>14}   |wp - sn form| = {mpmath.nstr(abs(wp - ref), 3)}")
