from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class PhysicsParams:
    """Coupling ``c``, Fermi momentum ``k_F`` and, for finite systems, ``L`` and ``N``.

    Units follow the Hamiltonian: energy = k**2 (hbar = 2m = 1). ``c`` may be
    ``math.inf`` only for the thermodynamic infinite-coupling path.
    """

    c: float
    k_F: float
    L: float | None = None
    N: int | None = None

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"coupling must be positive, got c={self.c}")
        if not (self.k_F > 0 and math.isfinite(self.k_F)):
            raise DomainError(f"k_F must be positive and finite, got {self.k_F}")
        if (self.L is None) != (self.N is None):
            raise DomainError("L and N must be given together")
        if self.L is not None:
            if not (self.L > 0 and math.isfinite(self.L)):
                raise DomainError(f"box length must be positive, got L={self.L}")
            if int(self.N) != self.N or self.N < 1:
                raise DomainError(f"N must be a positive integer, got {self.N}")
            if not math.isfinite(self.c):
                raise DomainError("finite systems need a finite coupling")
            if not math.isclose(self.k_F, math.pi * self.N / self.L, rel_tol=1e-12):
                raise DomainError("finite system requires k_F = pi N / L")

    @classmethod
    def finite(cls, c: float, L: float, N: int) -> "PhysicsParams":
        return cls(c=c, k_F=math.pi * N / L, L=float(L), N=int(N))

    @classmethod
    def thermodynamic(cls, c: float, k_F: float) -> "PhysicsParams":
        return cls(c=c, k_F=k_F)

    @property
    def is_finite(self) -> bool:
        return self.L is not None

    @property
    def a(self) -> float:
        """Small parameter 4/(L c) of the finite system."""
        if self.L is None:
            raise DomainError("a = 4/(L c) needs a box length")
        return 4.0 / (self.L * self.c)
