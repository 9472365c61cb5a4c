"""QKD with intra-particle (path x polarization) entanglement: states, optics, attacks, rates."""

__version__ = "0.1.0"
