#!/usr/bin/env python3
"""Independent reference computations for values frozen into the C++ tests.

Nothing here shares code with the library; rerun to regenerate the constants.
"""
import math

from scipy.optimize import brentq


def crc8_table():
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = ((crc << 1) ^ 0x07) & 0xFF if crc & 0x80 else (crc << 1) & 0xFF
        table.append(crc)
    return table


TABLE = crc8_table()


def crc8(data):
    crc = 0
    for b in data:
        crc = TABLE[crc ^ b]
    return crc


def frame(opcode, channel, payload):
    body = [opcode, channel, payload >> 8, payload & 0xFF]
    return [0xA5] + body + [crc8(body)]


def crossover(alpha, d_ref, loss_ref):
    f = lambda d: alpha * d - loss_ref - 20 * math.log10(d / d_ref)
    lo = max(d_ref, 20 / (alpha * math.log(10)))
    return brentq(f, lo, 1e6, xtol=1e-12, rtol=1e-15)


if __name__ == "__main__":
    print("crc8('123456789') = 0x%02X" % crc8(b"123456789"))
    print("crc8 self-check residues:", sorted({crc8([b, crc8([b])]) for b in range(256)}))
    for args in [(0x01, 3, 120), (0x02, 0, 150), (0x06, 0xFF, 0)]:
        print(" ".join("%02X" % x for x in frame(*args)))
    for a, l0 in [(0.2, 0.0), (0.4, 0.0), (0.2, 10.0)]:
        print("crossover alpha=%g L0=%g: %.9f km" % (a, l0, crossover(a, 1.0, l0)))
    tau = 1e-9 / math.log(9)
    print("tau default = %.6e s" % tau)
    print("plateau at 2 ns end, amp 3.0 V: %.9f" % (3.0 * (1 - math.exp(-2e-9 / tau))))
    # FWHM of the filtered 2 ns pulse: continuous-time first-order response.
    peak = 3.0 * (1 - math.exp(-2e-9 / tau))
    half = peak / 2
    t_rise = -tau * math.log(1 - half / 3.0)
    t_fall = 2e-9 + tau * math.log(peak / half)
    print("filtered 2 ns FWHM = %.6e s" % (t_fall - t_rise))
    print("amp 6 V width 5 ns plateau = %.9f" % (6.0 * (1 - math.exp(-5e-9 / tau))))
