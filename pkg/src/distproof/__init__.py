"""Distributed proof generation over simulated worker clusters.

Prime-field arithmetic, multilinear tables, sumcheck and GKR provers, a
hash-based polynomial commitment, a metered cluster runtime, and the
beacon-state demo that ties them together.
"""

from .field import BN254, GOLDILOCKS, TOY97, FieldConfig, FieldElement, get_field
from .pipeline import RunConfig, run_epoch

__all__ = ["BN254", "GOLDILOCKS", "TOY97", "FieldConfig", "FieldElement", "RunConfig", "get_field", "run_epoch"]
__version__ = "0.1.0"
