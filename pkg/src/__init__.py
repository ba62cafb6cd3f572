"""MemDrift: structure-preserving simulation of degenerate drift-diffusion memristor models"""

__version__ = "1.0.0"
