"""Prime plus prime-square representations: sieves, singular series, sieve constants."""

__version__ = "0.1.0"
