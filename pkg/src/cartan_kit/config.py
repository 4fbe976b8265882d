"""Central tolerance and step-size configuration.

Every numerical threshold used by the verifiers lives here so a run can be
re-profiled from the command line (``--tol name=value``) or via the
``CARTAN_KIT_TOL_PROFILE`` environment variable.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

PROFILE_ENV_VAR = "CARTAN_KIT_TOL_PROFILE"


@dataclass(frozen=True)
class Tolerances:
    # group / algebra plumbing
    membership: float = 1e-9
    reexpansion: float = 1e-9
    # manifold plumbing
    transition: float = 1e-9
    cocycle: float = 1e-9
    quadrature: float = 2e-4
    fd_step: float = 1e-5
    fd_richardson_step: float = 1e-3
    curvature_fd_step: float = 1e-4
    sample_margin: float = 0.1
    # axiom checks
    equivariance: float = 1e-6
    reproduction: float = 1e-9
    horizontality: float = 1e-8
    tensorial: float = 1e-8
    roundtrip: float = 1e-9
    lift_independence: float = 1e-9
    surjectivity: float = 1e-6
    isomorphism_det: float = 1e-8
    partition: float = 1e-9
    curvature: float = 1e-5
    torsion: float = 1e-4
    curvature_tensorial: float = 1e-4
    witness: float = 1e-8
    euler: float = 1e-3
    flat_euler: float = 1e-6

    def with_overrides(self, overrides: dict[str, float]) -> "Tolerances":
        known = {f.name for f in dataclasses.fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise KeyError(f"unknown tolerance name(s): {', '.join(unknown)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in overrides.items()})

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


PROFILES: dict[str, Tolerances] = {
    "default": Tolerances(),
    "strict": Tolerances(equivariance=1e-8, torsion=1e-5, curvature=1e-6),
    "loose": Tolerances(
        equivariance=1e-4,
        reproduction=1e-7,
        horizontality=1e-6,
        tensorial=1e-6,
        roundtrip=1e-7,
        lift_independence=1e-7,
        curvature=1e-3,
        torsion=1e-3,
    ),
}


def get_profile(name: str | None = None) -> Tolerances:
    """Return a tolerance profile by name, defaulting to the environment."""
    if name is None:
        name = os.environ.get(PROFILE_ENV_VAR, "default")
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(f"unknown tolerance profile {name!r}; choose from {sorted(PROFILES)}") from None


DEFAULT = Tolerances()
