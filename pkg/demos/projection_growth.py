"""Exponential growth of spectral projections for i|x|^b potentials.

For -d^2/dx^2 + i x^2 and -d^2/dx^2 + i x^3 the projection norms grow
exponentially in n, with rates log(1 + sqrt 2) and pi/sqrt 3.  The left and
right eigenvectors become nearly orthogonal, so the overlap is computed with
a compensated dot product; once it reaches the rounding floor the mode is
flagged as precision limited.

Run:  python3 demos/projection_growth.py
"""
import math

import numpy as np

from anharmonic import model, spectra
from anharmonic.discretize import BasisSpec, choose_scaling

cases = [
    ("i x^2", model.OscillatorSpec.even_imaginary(2), 256, (10, 25), math.log1p(math.sqrt(2))),
    ("i x^3", model.OscillatorSpec.odd_imaginary(1), 300, (8, 15), math.pi / math.sqrt(3)),
]

for label, spec, size, (lo, hi), rate in cases:
    scale = choose_scaling(spec, size) if spec.family == "EvenImaginary" else 1.0
    s = spectra.compute_spectrum(spec, BasisSpec(size, scale), hi + 5)
    norms = dict(spectra.projection_norms(s, include_untrusted=True))
    n = np.arange(lo, hi + 1)
    slope = np.polyfit(n, np.log([norms[k] for k in n]), 1)[0]
    print(f"{label}: log||P_n|| slope over n={lo}..{hi} is {slope:.4f}, expected {rate:.4f}")
    for k in (lo, (lo + hi) // 2, hi):
        flag = " (precision limited)" if s.precision_limited[k - 1] else ""
        print(f"    n={k:2d}  lambda={s.values[k - 1]:.4f}  ||P_n||={norms[k]:.3e}{flag}")
