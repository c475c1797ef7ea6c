"""qcrb package.

Quantum multiparameter Cramer-Rao bounds: SLD, RLD, beta, maximum
logarithmic derivative and Holevo bounds for finite dimensional models.
"""

__version__ = "0.1.0"
