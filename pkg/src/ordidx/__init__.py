"""Densities of primes whose multiplicative order (or residual index) of a
rational base lies in a given residue class, with brute-force verification."""

__version__ = "0.1.0"
