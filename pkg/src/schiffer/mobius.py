"""Mobius maps z -> (a z + b) / (c z + d) acting on complex arrays."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Mobius:
    a: complex = 1.0
    b: complex = 0.0
    c: complex = 0.0
    d: complex = 1.0

    @classmethod
    def normalized(cls, a, b, c, d) -> "Mobius":
        det = a * d - b * c
        if abs(det) < 1e-14:
            raise ValueError("degenerate Mobius map (ad - bc = 0)")
        s = np.sqrt(complex(det))
        return cls(complex(a) / s, complex(b) / s, complex(c) / s, complex(d) / s)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        return self.det / (self.c * z + self.d) ** 2

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "Mobius") -> "Mobius":
        """Return self o other."""
        return Mobius(self.a * other.a + self.b * other.c,
                      self.a * other.b + self.b * other.d,
                      self.c * other.a + self.d * other.c,
                      self.c * other.b + self.d * other.d)

    @property
    def pole(self) -> complex:
        """Preimage of infinity (inf when c = 0)."""
        if self.c == 0:
            return complex(np.inf)
        return -self.d / self.c

    @property
    def image_of_infinity(self) -> complex:
        if self.c == 0:
            return complex(np.inf)
        return self.a / self.c

    def is_identity(self) -> bool:
        return self.c == 0 and self.b == 0 and self.a == self.d

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)


IDENTITY = Mobius()
