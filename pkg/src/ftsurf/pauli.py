"""Signless sparse Pauli strings and Clifford conjugation rules.

Pauli strings are tracked up to global phase: an operator is a pair of qubit
sets, one carrying an X factor and one carrying a Z factor (a qubit in both
sets carries Y).  This is all that error propagation, commutation checks and
syndrome computations need, and it makes multiplication a pair of XORs.
"""

from __future__ import annotations

import re
from typing import Iterable

__all__ = [
    "PauliString",
    "conjugate_h",
    "conjugate_cz",
    "conjugate_czz",
    "conjugate",
]

_LABEL_RE = re.compile(r"^([XYZ])(\d+)$")


def _mask(qubits: Iterable[int]) -> int:
    m = 0
    for q in qubits:
        if q < 0:
            raise ValueError(f"negative qubit index {q}")
        m |= 1 << q
    return m


def _bits(mask: int) -> list[int]:
    out = []
    q = 0
    while mask:
        if mask & 1:
            out.append(q)
        mask >>= 1
        q += 1
    return out


class PauliString:
    """A signless Pauli operator on non-negative integer qubit indices.

    Internally two integer bitmasks, ``x`` and ``z``; qubit ``q`` carries
    X if only bit ``q`` of ``x`` is set, Z if only bit ``q`` of ``z`` is set,
    and Y if both are.

    Examples
    --------
    >>> a = PauliString.from_label("X0*Z3*Y7")
    >>> b = PauliString(x=0b1, z=0b1)   # Y0
    >>> str(a * b)
    'Z0*Z3*Y7'
    >>> a.commutes_with(b)
    False
    """

    __slots__ = ("x", "z")

    def __init__(self, x: int = 0, z: int = 0):
        self.x = x
        self.z = z

    @classmethod
    def identity(cls) -> "PauliString":
        return cls(0, 0)

    @classmethod
    def from_supports(
        cls, x_support: Iterable[int] = (), z_support: Iterable[int] = ()
    ) -> "PauliString":
        return cls(_mask(x_support), _mask(z_support))

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"X0*Z3*Y7"`` (``"I"`` for the identity)."""
        label = label.strip()
        if not label:
            raise ValueError("empty Pauli label (use 'I' for the identity)")
        if label == "I":
            return cls(0, 0)
        x = z = 0
        for term in label.split("*"):
            m = _LABEL_RE.match(term.strip())
            if m is None:
                raise ValueError(f"bad Pauli term {term!r}")
            kind, q = m.group(1), int(m.group(2))
            bit = 1 << q
            if (x | z) & bit:
                raise ValueError(f"qubit {q} appears twice in {label!r}")
            if kind in ("X", "Y"):
                x |= bit
            if kind in ("Z", "Y"):
                z |= bit
        return cls(x, z)

    @property
    def x_support(self) -> frozenset[int]:
        return frozenset(_bits(self.x))

    @property
    def z_support(self) -> frozenset[int]:
        return frozenset(_bits(self.z))

    def support(self) -> frozenset[int]:
        return frozenset(_bits(self.x | self.z))

    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return PauliString(self.x ^ other.x, self.z ^ other.z)

    def commutes_with(self, other: "PauliString") -> bool:
        """Symplectic test: commute iff overlaps of X-with-Z parts are even."""
        anti = (self.x & other.z).bit_count() + (self.z & other.x).bit_count()
        return anti % 2 == 0

    def pauli_at(self, q: int) -> str:
        xb = (self.x >> q) & 1
        zb = (self.z >> q) & 1
        return "IXZY"[xb + 2 * zb] if xb + 2 * zb != 3 else "Y"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and self.x == other.x
            and self.z == other.z
        )

    def __hash__(self) -> int:
        return hash((self.x, self.z))

    def __bool__(self) -> bool:
        return not self.is_identity()

    def __str__(self) -> str:
        if self.is_identity():
            return "I"
        terms = []
        for q in _bits(self.x | self.z):
            xb = (self.x >> q) & 1
            zb = (self.z >> q) & 1
            terms.append(("X" if not zb else "Y" if xb else "Z") + str(q))
        return "*".join(terms)

    def __repr__(self) -> str:
        return f"PauliString.from_label({str(self)!r})"


def conjugate_h(p: PauliString, q: int) -> PauliString:
    """Hadamard on qubit ``q``: swaps the X and Z factors there."""
    bit = 1 << q
    xb = p.x & bit
    zb = p.z & bit
    return PauliString((p.x & ~bit) | zb, (p.z & ~bit) | xb)


def conjugate_cz(p: PauliString, a: int, b: int) -> PauliString:
    """CZ on ``(a, b)``: an X factor on either qubit deposits Z on the other."""
    z = p.z
    if (p.x >> a) & 1:
        z ^= 1 << b
    if (p.x >> b) & 1:
        z ^= 1 << a
    return PauliString(p.x, z)


def conjugate_czz(p: PauliString, a: int, b: int, c: int) -> PauliString:
    """Three-qubit controlled-phase on ``(a, b, c)``.

    Acts as the product of CZ(a, b) and CZ(a, c): an X factor on ``a``
    deposits Z on both ``b`` and ``c``; an X factor on ``b`` or ``c``
    deposits Z on ``a`` only.  Z factors pass through unchanged.
    """
    z = p.z
    if (p.x >> a) & 1:
        z ^= (1 << b) | (1 << c)
    if (p.x >> b) & 1:
        z ^= 1 << a
    if (p.x >> c) & 1:
        z ^= 1 << a
    return PauliString(p.x, z)


def conjugate(p: PauliString, gate: str, qubits: tuple[int, ...]) -> PauliString:
    """Propagate ``p`` through a named Clifford gate (Heisenberg picture)."""
    if gate == "H":
        (q,) = qubits
        return conjugate_h(p, q)
    if gate == "CZ":
        a, b = qubits
        return conjugate_cz(p, a, b)
    if gate == "CZZ":
        a, b, c = qubits
        return conjugate_czz(p, a, b, c)
    raise ValueError(f"unknown gate {gate!r}")
