"""Surface-code layouts: qubit coordinates, stabilizers, logical operators.

Two families are supported, both with one logical qubit and odd distance
``d``:

* ``"unrotated"`` — data qubits on the vertices of a ``(2d-1) x (2d-1)``
  checkerboard (``x + y`` even).  The "outer" sublattice (``x`` and ``y``
  both even) is a ``d x d`` grid and carries the minimum-weight logical
  representatives; the "inner" sublattice (both odd) is ``(d-1) x (d-1)``.
  Ancillas sit on the complementary checkerboard: X-type at (even, odd),
  Z-type at (odd, even).  Each stabilizer acts on its four lattice
  neighbors, labeled N/E/S/W (``y`` grows southward); boundary stabilizers
  lose one neighbor and have weight 3.

* ``"rotated"`` — data qubits at (odd, odd) points of a ``(2d+1) x (2d+1)``
  grid (a ``d x d`` array).  Stabilizers sit at plaquette centers
  (even, even) and act on the plaquette corners.  Corners are labeled with
  the same compass letters via a 45-degree mapping: N = (+1, -1),
  E = (+1, +1), S = (-1, +1), W = (-1, -1) relative to the ancilla.
  Interior plaquettes have weight 4; boundary half-plaquettes have
  weight 2 (X-type along the top/bottom edges, Z-type along the sides).

Logical representatives are fixed to the west column (logical Z for the
unrotated family, logical X for the rotated one, both vertical) and the
north row (the horizontal partner).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .linalg2 import ReducedBasis, reduce_basis
from .pauli import PauliString

__all__ = [
    "StabilizerDef",
    "Layout",
    "build_layout",
    "KINDS",
]

KINDS = ("rotated", "unrotated")

_DIRECTIONS = ("N", "E", "S", "W")


@dataclass(frozen=True)
class StabilizerDef:
    """One stabilizer generator: type, ancilla site and labeled data support."""

    index: int
    pauli_type: str  # "X" or "Z"
    position: tuple[int, int]
    neighbors: dict[str, int]  # direction label -> data qubit id

    @property
    def weight(self) -> int:
        return len(self.neighbors)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.neighbors.values())


@dataclass
class Layout:
    """A fixed code layout with query helpers.

    Data qubits are ids ``0 .. n_data-1``; the ancilla of stabilizer ``k``
    is qubit ``n_data + k``.  Stabilizers are ordered X-type first, each
    type sorted by (row, column) of the ancilla.
    """

    kind: str
    d: int
    data_coords: list[tuple[int, int]]
    stabilizers: list[StabilizerDef]
    logical_x: frozenset[int]
    logical_z: frozenset[int]
    _x_basis: ReducedBasis = field(repr=False, default=None)
    _z_basis: ReducedBasis = field(repr=False, default=None)

    def __post_init__(self):
        self._x_basis = reduce_basis(
            [self._support_mask(s) for s in self.stabilizers if s.pauli_type == "X"]
        )
        self._z_basis = reduce_basis(
            [self._support_mask(s) for s in self.stabilizers if s.pauli_type == "Z"]
        )
        self._validate()

    # -- sizes ---------------------------------------------------------

    @property
    def n_data(self) -> int:
        return len(self.data_coords)

    @property
    def n_stabilizers(self) -> int:
        return len(self.stabilizers)

    @property
    def n_qubits(self) -> int:
        """Data plus ancilla qubits (one ancilla per stabilizer)."""
        return self.n_data + self.n_stabilizers

    def ancilla_qubit(self, stab_index: int) -> int:
        return self.n_data + stab_index

    @property
    def x_stabilizers(self) -> list[StabilizerDef]:
        return [s for s in self.stabilizers if s.pauli_type == "X"]

    @property
    def z_stabilizers(self) -> list[StabilizerDef]:
        return [s for s in self.stabilizers if s.pauli_type == "Z"]

    # -- queries -------------------------------------------------------

    def _support_mask(self, stab: StabilizerDef) -> int:
        m = 0
        for q in stab.neighbors.values():
            m |= 1 << q
        return m

    def syndrome(self, error: PauliString) -> int:
        """Bitmask over stabilizer indices that anticommute with ``error``.

        X-type stabilizers see the Z part of the error and vice versa; a
        single X error on a bulk data qubit therefore sets exactly the two
        adjacent Z-stabilizer bits.
        """
        syn = 0
        for stab in self.stabilizers:
            m = self._support_mask(stab)
            part = error.z if stab.pauli_type == "X" else error.x
            if (m & part).bit_count() % 2:
                syn |= 1 << stab.index
        return syn

    def in_stabilizer_group(self, pauli: PauliString) -> bool:
        """True iff ``pauli`` is a product of stabilizer generators."""
        return self._x_basis.contains(pauli.x) and self._z_basis.contains(pauli.z)

    def residual(self, pauli: PauliString) -> tuple[int, int]:
        """Canonical coset representative modulo the stabilizer group.

        Two errors are stabilizer-equivalent iff their residuals coincide
        (their product then row-reduces to zero against the generators).
        """
        return (self._x_basis.reduce(pauli.x), self._z_basis.reduce(pauli.z))

    def logical_action(self, pauli: PauliString) -> tuple[int, int]:
        """Commutation of ``pauli`` with the (Z, X) logical representatives.

        Returns ``(a, b)`` with ``a = 1`` iff ``pauli`` anticommutes with
        logical Z (i.e. acts like a logical X on the encoded qubit when its
        syndrome is trivial), and ``b = 1`` iff it anticommutes with
        logical X.
        """
        zl = _mask_of(self.logical_z)
        xl = _mask_of(self.logical_x)
        a = (pauli.x & zl).bit_count() % 2
        b = (pauli.z & xl).bit_count() % 2
        return (a, b)

    def code_distance_bruteforce(self) -> int:
        """Minimum weight of a logical operator, by exhaustive search.

        CSS structure lets the X-type and Z-type sectors be searched
        independently over plain qubit subsets.  Exponential; intended for
        ``d <= 5``.
        """
        best = self.n_data
        zl = _mask_of(self.logical_z)
        xl = _mask_of(self.logical_x)
        for basis, logical_mask, checks in (
            ("X", zl, self.z_stabilizers),
            ("Z", xl, self.x_stabilizers),
        ):
            check_masks = [self._support_mask(s) for s in checks]
            for w in range(1, best + 1):
                found = False
                for combo in combinations(range(self.n_data), w):
                    v = 0
                    for q in combo:
                        v |= 1 << q
                    if (v & logical_mask).bit_count() % 2 == 0:
                        continue
                    if any((v & m).bit_count() % 2 for m in check_masks):
                        continue
                    found = True
                    break
                if found:
                    best = min(best, w)
                    break
        return best

    # -- construction checks -------------------------------------------

    def _validate(self):
        d = self.d
        if self.kind == "rotated":
            expected = {4: (d - 1) ** 2, 2: 2 * (d - 1)}
        else:
            expected = {4: 2 * (d - 1) * (d - 2), 3: 4 * (d - 1)}
        seen: dict[int, int] = {}
        for s in self.stabilizers:
            seen[s.weight] = seen.get(s.weight, 0) + 1
        if seen != {w: n for w, n in expected.items() if n}:
            raise AssertionError(f"stabilizer census {seen} != {expected}")
        paulis = [self._stab_pauli(s) for s in self.stabilizers]
        for i, a in enumerate(paulis):
            for b in paulis[i + 1 :]:
                if not a.commutes_with(b):
                    raise AssertionError("non-commuting stabilizers")
        xl = PauliString(x=_mask_of(self.logical_x))
        zl = PauliString(z=_mask_of(self.logical_z))
        for p in paulis:
            if not (p.commutes_with(xl) and p.commutes_with(zl)):
                raise AssertionError("logical operator hits a stabilizer")
        if xl.commutes_with(zl):
            raise AssertionError("logical X and Z must anticommute")

    def _stab_pauli(self, stab: StabilizerDef) -> PauliString:
        m = self._support_mask(stab)
        return PauliString(x=m) if stab.pauli_type == "X" else PauliString(z=m)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.d,
            "n_data": self.n_data,
            "n_qubits": self.n_qubits,
            "data_coordinates": {
                str(i): list(c) for i, c in enumerate(self.data_coords)
            },
            "stabilizers": [
                {
                    "index": s.index,
                    "type": s.pauli_type,
                    "ancilla_qubit": self.ancilla_qubit(s.index),
                    "position": list(s.position),
                    "neighbors": s.neighbors,
                }
                for s in self.stabilizers
            ],
            "logical_x": sorted(self.logical_x),
            "logical_z": sorted(self.logical_z),
        }


def _mask_of(qubits) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def build_layout(kind: str, d: int) -> Layout:
    """Construct a distance-``d`` layout of the given kind.

    Parameters
    ----------
    kind : {"rotated", "unrotated"}
    d : odd int >= 3
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if d < 3 or d % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 3, got {d}")
    if kind == "unrotated":
        return _build_unrotated(d)
    return _build_rotated(d)


def _build_unrotated(d: int) -> Layout:
    span = 2 * d - 1
    data_coords = [
        (x, y) for y in range(span) for x in range(span) if (x + y) % 2 == 0
    ]
    index = {c: i for i, c in enumerate(data_coords)}

    def neighbors_of(x: int, y: int) -> dict[str, int]:
        candidates = {
            "N": (x, y - 1),
            "E": (x + 1, y),
            "S": (x, y + 1),
            "W": (x - 1, y),
        }
        return {
            lab: index[c]
            for lab, c in candidates.items()
            if c in index
        }

    stabs: list[StabilizerDef] = []
    x_sites = [
        (x, y)
        for y in range(span)
        for x in range(span)
        if x % 2 == 0 and y % 2 == 1
    ]
    z_sites = [
        (x, y)
        for y in range(span)
        for x in range(span)
        if x % 2 == 1 and y % 2 == 0
    ]
    for sites, ptype in ((x_sites, "X"), (z_sites, "Z")):
        for (x, y) in sorted(sites, key=lambda c: (c[1], c[0])):
            stabs.append(
                StabilizerDef(len(stabs), ptype, (x, y), neighbors_of(x, y))
            )

    logical_z = frozenset(index[(0, y)] for y in range(0, span, 2))
    logical_x = frozenset(index[(x, 0)] for x in range(0, span, 2))
    return Layout("unrotated", d, data_coords, stabs, logical_x, logical_z)


def _build_rotated(d: int) -> Layout:
    data_coords = [
        (2 * i + 1, 2 * j + 1) for j in range(d) for i in range(d)
    ]
    index = {c: i for i, c in enumerate(data_coords)}

    def corners_of(x: int, y: int) -> dict[str, int]:
        candidates = {
            "N": (x + 1, y - 1),
            "E": (x + 1, y + 1),
            "S": (x - 1, y + 1),
            "W": (x - 1, y - 1),
        }
        return {lab: index[c] for lab, c in candidates.items() if c in index}

    sites: list[tuple[tuple[int, int], str]] = []
    for j in range(d + 1):
        for i in range(d + 1):
            ptype = "X" if (i + j) % 2 == 1 else "Z"
            interior_x = 1 <= i <= d - 1
            interior_y = 1 <= j <= d - 1
            if interior_x and interior_y:
                sites.append(((2 * i, 2 * j), ptype))
            elif interior_x and ptype == "X" and (j == 0 or j == d):
                sites.append(((2 * i, 2 * j), ptype))
            elif interior_y and ptype == "Z" and (i == 0 or i == d):
                sites.append(((2 * i, 2 * j), ptype))

    stabs: list[StabilizerDef] = []
    for ptype in ("X", "Z"):
        for (x, y), t in sorted(sites, key=lambda s: (s[0][1], s[0][0])):
            if t == ptype:
                stabs.append(
                    StabilizerDef(len(stabs), ptype, (x, y), corners_of(x, y))
                )

    logical_x = frozenset(index[(1, 2 * j + 1)] for j in range(d))
    logical_z = frozenset(index[(2 * i + 1, 1)] for i in range(d))
    return Layout("rotated", d, data_coords, stabs, logical_x, logical_z)
