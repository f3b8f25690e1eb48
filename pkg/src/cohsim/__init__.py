"""cohsim: coherence costs of quantum channel implementations under MIO.

The package computes robustness-of-coherence measures for states and
channels, simulation and amortized costs of implementing channels with
coherent resources under maximally incoherent operations, implementation
error and gate-fidelity SDPs for arbitrary resource states, and the flagpole
constructions that characterize which weakly coherent states remain useful.
"""

__version__ = "0.1.0"

from . import channels, figures, implement, linalg, measures, resources, sdp  # noqa: E402,F401
