"""The shifted harmonic oscillator: exact eigenvalues, wildly non-normal modes.

-d^2/dx^2 + x^2 + i x is a translate of the harmonic oscillator, so its
eigenvalues are the familiar odd integers moved by 1/4.  Its eigenfunctions
are shifted Hermite functions, and the angle between left and right
eigenvectors closes quickly: the spectral projections grow like
exp(sqrt(2 n)) / n^(1/4) up to a constant.

Run:  python3 demos/shifted_oscillator.py
"""
import numpy as np

from anharmonic import model, spectra
from anharmonic.discretize import BasisSpec

spec = model.shifted_oscillator(1j, 0.0)
s = spectra.compute_spectrum(spec, BasisSpec(256), 30, check=False)

print(" n   computed lambda_n          exact      ||P_n||      predicted   ratio")
for n in range(1, 31, 3):
    lam = s.values[n - 1]
    exact = model.exact_shifted_ho(1j, 0.0, n)
    pn = s.projection_norms[n - 1]
    pred = model.predicted_projection_norm(spec, n).value
    print(f"{n:2d}  {lam.real:10.6f}{lam.imag:+.1e}i  {exact.real:9.4f}  {pn:11.4e}  {pred:11.4e}  {pn / pred:.3f}")

# the ratio drifts towards 1 slowly: the closed form is only the leading term,
# and the n^(-1/4) prefactor drags a plain sqrt(n) fit below sqrt 2
fit = spectra.fit_growth(spectra.projection_norms(s), sigma=0.5)
print(f"\nfit of log||P_n|| against sqrt(n): slope {fit.gamma_hat:.4f} (sqrt 2 = {np.sqrt(2):.4f})")
