"""Executable principal bundles, connections, soldering forms and Cartan connections.

Every construction is checked by sampling: axioms become residuals, and the
equivalences between the structures become numerical round-trips.
"""

from .config import DEFAULT, Tolerances, get_profile
from .report import CheckRecord, VerificationReport

__all__ = ["DEFAULT", "Tolerances", "get_profile", "CheckRecord", "VerificationReport"]
__version__ = "0.1.0"
