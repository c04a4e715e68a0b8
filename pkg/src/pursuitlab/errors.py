"""Exception types shared across the package."""

from __future__ import annotations

import numpy as np


class RankDeficiencyError(RuntimeError):
    """Raised when a column subset is numerically rank deficient.

    Carries the offending index set so callers (and error messages) can
    name exactly which columns broke the solve.
    """

    def __init__(self, omega: np.ndarray, detail: str = ""):
        self.omega = np.asarray(omega)
        msg = f"rank-deficient column set of size {self.omega.size}"
        if self.omega.size <= 16:
            msg += f" {self.omega.tolist()}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
