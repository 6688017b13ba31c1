"""Symmetric logarithmic frequency grids for scans along the imaginary axis."""
from dataclasses import dataclass

import numpy as np

__all__ = ["FrequencyGrid"]


@dataclass(frozen=True)
class FrequencyGrid:
    """Grid ``+-scale * 10**e`` for decade-aligned exponents in ``[lo_exp, hi_exp]``.

    ``scale`` is normally ``|spectral abscissa of F|`` so that the grid tracks the
    plant time scale. Exponents are multiples of ``1/per_decade``, which keeps
    ``omega = scale`` (and every decade) exactly on the grid. ``omega = 0`` is
    always included; ``sentinel`` adds ``+-sentinel`` (absolute, not scaled) to
    stand in for the ``omega -> +-inf`` endpoints.
    """

    lo_exp: int = -4
    hi_exp: int = 6
    per_decade: int = 400
    sentinel: float = 1e9

    def positive(self, scale=1.0):
        # snap so that a scale of 1 +- rounding still puts omega = 1 on the grid
        scale = float(f"{scale:.12g}")
        k = np.arange(self.lo_exp * self.per_decade, self.hi_exp * self.per_decade + 1)
        return scale * 10.0 ** (k / self.per_decade)

    def points(self, scale=1.0, sentinel=True):
        pos = self.positive(scale)
        parts = [-pos[::-1], [0.0], pos]
        if sentinel and self.sentinel:
            parts = [[-self.sentinel]] + parts + [[self.sentinel]]
        return np.unique(np.concatenate(parts))


COARSE = FrequencyGrid(per_decade=50, sentinel=0.0)
