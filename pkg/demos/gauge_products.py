"""Infinite products with zeros at -(k/nu)^(1/rho) and their partial fractions.

At rho = 1/2 the product is sinh(pi nu sqrt w) / (pi nu sqrt w), which gives
a closed form to compare against.  At rho = 1/3 the coefficients of the
partial-fraction expansion involve the zero-deleted products A(n; 3).

Run:  python3 demos/gauge_products.py
"""
import math

from anharmonic import gauge

half = gauge.GaugeSpec(1.0, 0.5)
for w in (1.0, 4.0, 9.0):
    v = gauge.eval_F(half, w)
    closed = math.sinh(math.pi * math.sqrt(w)) / (math.pi * math.sqrt(w))
    print(f"F({w:g}) = {math.exp(v.log_abs):.12e}   closed form {closed:.12e}   terms {v.terms}")

print("\nA(n; 2) is exactly 1/2:", [round(gauge.a_product(n, 2.0), 12) for n in range(1, 6)])

cubic = gauge.GaugeSpec(1.0, 1.0 / 3.0)
print("\n n   a_n     log A(n;3)   log|F'(-a_n)|")
for n in (1, 2, 5, 10, 20, 40):
    print(f"{n:2d}  {gauge.zero(cubic, n):6.1f}  {gauge.log_a_product(n, 3.0):10.4f}  "
          f"{gauge.log_abs_f_prime(cubic, n):12.4f}")
