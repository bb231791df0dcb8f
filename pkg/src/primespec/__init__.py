"""Prime gaps, unfolding and spectral rigidity of the primes."""

__version__ = "0.1.0"
