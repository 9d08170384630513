"""Central tolerance and limit-policy records.

Every numerical threshold used by the package defaults to the values
below; all entry points accept per-call overrides.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10          # max |M - M^H| accepted as Hermitian
    unitary: float = 1e-10            # max |U^H U - I| accepted as unitary
    gram_schmidt_drop: float = 1e-10  # post-projection norm below which a vector is dropped
    orthogonal_overlap: float = 1e-10  # |<Y|psi>| below this counts as orthogonal to the probe
    saturation_residual: float = 1e-8  # condition residuals below this pass
    saturation_gap: float = 1e-6      # ||F_Q - F||_2 below this counts as saturated
    weak_commutativity: float = 1e-8  # max |Im Omega| above this forbids saturation
    completeness: float = 1e-9        # entrywise |sum_k P_k - I| for complete sets


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class LimitPolicy:
    """How indeterminate 0/0 contributions at zero-probability outcomes are resolved.

    The limit is taken along ``theta + delta * direction`` for the listed
    step sizes and Richardson-extrapolated.  ``direction=None`` means the
    diagonal direction (1, ..., 1)/sqrt(d).  Outcomes whose probability
    stays below ``probability_floor`` at every step are identically zero
    along the path and contribute nothing.
    """

    probability_floor: float = 1e-12
    derivative_floor: float = 1e-12   # all |<Y|d_j psi>| below this: contribution vanishes analytically
    step_floor: float = 1e-18         # below this a displaced probability counts as structurally zero
    direction: tuple | None = None
    steps: tuple = (1e-3, 5e-4, 2.5e-4)
    convergence_tol: float = 1e-6
    fallback_step_scale: float = 0.1  # first-order-dark ratio limits shrink the steps by this factor
    audit_directions: bool = False    # also evaluate along each coordinate axis
    audit_spread: float = 1e-5        # spread flagged as direction dependence

    def unit_direction(self, d: int) -> np.ndarray:
        if self.direction is None:
            u = np.ones(d)
        else:
            u = np.asarray(self.direction, dtype=float)
            if u.shape != (d,):
                raise ValueError(f"direction must have length {d}")
        norm = np.linalg.norm(u)
        if norm == 0:
            raise ValueError("limit direction must be nonzero")
        return u / norm


DEFAULT_LIMIT_POLICY = LimitPolicy()
