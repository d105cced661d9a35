"""Target tori |z|^2 = R, |w_j|^2 = t_j in C^n."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TorusSpec:
    """Product torus.

    With ``convention="squared"`` (the default) ``R`` is the squared radius of
    the z-circle, matching ``|z|^2 = R``.  With ``convention="radius"`` it is
    the radius itself.  The ``t_j`` are always squared radii.
    """

    R: float = 1.0
    t: tuple = ()
    convention: str = "squared"

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(float(x) for x in np.atleast_1d(self.t)))
        object.__setattr__(self, "R", float(self.R))
        if self.convention not in ("squared", "radius"):
            raise ValueError(f"unknown torus convention {self.convention!r}")
        if self.R <= 0 or any(x <= 0 for x in self.t):
            raise ValueError("torus radii must be strictly positive")

    @property
    def n(self):
        return 1 + len(self.t)

    def squared(self):
        """Squared circle radii per component."""
        Rsq = self.R if self.convention == "squared" else self.R**2
        return np.array((Rsq,) + self.t)

    def radii(self):
        return np.sqrt(self.squared())

    def with_t(self, t):
        return TorusSpec(self.R, tuple(t), self.convention)

    def defect(self, Z):
        """|Z_j|^2 - r_j^2 for points Z of shape (n, ...)."""
        Z = np.asarray(Z)
        r2 = self.squared().reshape((-1,) + (1,) * (Z.ndim - 1))
        return np.abs(Z) ** 2 - r2

    def contains(self, point, tol=1e-12):
        return bool(np.max(np.abs(self.defect(np.asarray(point, dtype=complex)))) <= tol)
