"""
Bergman Weak-Type Lab

Numerics for the Bergman projection on the unit disc, the bidisc and the
Hartogs triangle: closed-form kernels, series and quadrature projectors,
distribution functions, Orlicz and Lorentz norms, Bekolle-Bonami constants,
and sweeps that track weak-type ratios along counterexample families.
"""

__version__ = "1.0.0"
