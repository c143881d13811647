"""Write q-expansion coefficient tables of elliptic-curve newforms.

Usage: python3 gen_newform_table.py LEVEL ORDER OUT a1,a2,a3,a4,a6 [a1,...]
"""
import sys
from math import isqrt


def primes_upto(n):
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [p for p in range(n + 1) if sieve[p]]


def count_points(a, p):
    a1, a2, a3, a4, a6 = a
    n = 1
    for x in range(p):
        rhs = (x ** 3 + a2 * x * x + a4 * x + a6) % p
        lin = (a1 * x + a3) % p
        for y in range(p):
            if (y * y + lin * y - rhs) % p == 0:
                n += 1
    return n


def frobenius_traces(a, level, order):
    ap = {}
    for p in primes_upto(order):
        ap[p] = p + 1 - count_points(a, p)
    coeffs = [0] * (order + 1)
    coeffs[1] = 1
    for n in range(2, order + 1):
        m, p = n, None
        for q in primes_upto(isqrt(n) + 1):
            if m % q == 0:
                p = q
                break
        if p is None:
            p = n
        k = 0
        while m % p == 0:
            m //= p
            k += 1
        pk = [1, ap[p]]
        for j in range(2, k + 1):
            if level % p == 0:
                pk.append(pk[-1] * ap[p])
            else:
                pk.append(ap[p] * pk[-1] - p * pk[-2])
        coeffs[n] = pk[k] * coeffs[m]
    return coeffs[1:]


def main():
    level, order, out = int(sys.argv[1]), int(sys.argv[2]), sys.argv[3]
    curves = [tuple(int(v) for v in arg.split(",")) for arg in sys.argv[4:]]
    with open(out, "w") as fh:
        fh.write(f"level {level} dim {len(curves)} order {order}\n")
        for a in curves:
            fh.write(" ".join(str(c) for c in frobenius_traces(a, level, order)) + "\n")


if __name__ == "__main__":
    main()
