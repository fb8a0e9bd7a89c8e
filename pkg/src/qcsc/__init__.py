"""Classical workbench for quantum-centric supercomputing experiments."""

__version__ = "0.1.0"
