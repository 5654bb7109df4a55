"""Single-electron NAND/XOR gates as Markov processes."""
__version__ = "0.1.0"
