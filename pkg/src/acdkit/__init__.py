"""acdkit: approximate common divisor lattice attacks and their
polynomial-ring analogues (multi-polynomial reconstruction / list decoding).
"""

__version__ = "0.1.0"
