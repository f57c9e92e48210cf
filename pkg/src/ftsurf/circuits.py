"""Stabilizer-readout circuit construction and fault-location enumeration.

The gate set is Z-basis initialization (``InitZ``), Z-basis measurement
(``MeasZ``), single-qubit Hadamard, and the entangling gates CZ and CZZ
(two CZs sharing a control).  A readout round runs the X-type cycle then
the Z-type cycle; data qubits are Hadamard-rotated only during the X
cycle, ancillas are sandwiched by Hadamards, and ancilla measurement and
re-initialization of one type are interleaved with the other type's
entangling timesteps:

    init X-anc | H (X-anc, data, Z-anc') | X-entangling steps   | H (all) | Z-entangling steps
                                           ^ MeasZ Z-anc (prev)             ^ MeasZ X-anc
                                           ^ InitZ Z-anc (last step)

CZ style uses four entangling timesteps per type (one direction each),
CZZ style two (one diagonal pair each).  X-basis memory absorbs the
plus-state preparation into the first Hadamard layer (the two would
cancel) and appends one data Hadamard layer before readout, keeping the
per-round Hadamard census identical in both bases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .layout import Layout, StabilizerDef
from .pauli import PauliString

__all__ = [
    "Instruction",
    "Circuit",
    "NoiseModel",
    "FaultLocation",
    "ElementaryFault",
    "Ordering",
    "resolve_ordering",
    "build_memory_circuit",
    "build_measurement_gadget",
    "enumerate_faults",
    "count_fault_locations",
    "rescale_depolarizing",
    "circuit_to_text",
    "circuit_from_text",
]

GATE_KINDS = ("H", "CZ", "CZZ", "InitZ", "MeasZ")

ENTANGLING_STEPS = {"cz": 4, "czz": 2}

# Diagonal pairings for CZZ scheduling: which two neighbor directions
# share the first gate and which share the second.
CZZ_PAIRINGS = {
    "ne": (("N", "E"), ("S", "W")),
    "nw": (("N", "W"), ("S", "E")),
    "ns": (("N", "S"), ("E", "W")),
}

# Numeric ordering labels enumerate (X-pairing, Z-pairing) combinations.
# 24 is the default: it is the unique combination whose weight-2 boundary
# stabilizers each fit in a single gate, and the verifier confirms it
# preserves the full effective distance on the unrotated code.
CZZ_ALIASES = {
    "21": ("ne", "nw"),
    "22": ("ne", "ne"),
    "24": ("nw", "ne"),
    "25": ("nw", "nw"),
}

CZ_DEFAULT = ("SEWN", "SWEN")


@dataclass(frozen=True)
class Ordering:
    """Resolved gate ordering: per-type direction schedule."""

    style: str  # "cz" or "czz"
    x_spec: str  # CZ: 4-letter direction permutation; CZZ: pairing key
    z_spec: str
    label: str

    @property
    def is_non_ft_diagonal(self) -> bool:
        return self.style == "czz" and "ns" in (self.x_spec, self.z_spec)


def resolve_ordering(style: str, label: Optional[str]) -> Ordering:
    """Parse an ordering label for the given style.

    CZ style accepts a 4-letter permutation of NESW (applied to both
    stabilizer types), a slash pair ``XSPEC/ZSPEC``, or the default
    ``"sewn"`` (X: SEWN, Z: SWEN).  CZZ style accepts a pairing key
    (``ne``/``nw``/``ns``, applied to both types), a slash pair, or a
    numeric alias (21/22/24/25).
    """
    style = style.lower()
    if style not in ENTANGLING_STEPS:
        raise ValueError(f"style must be 'cz' or 'czz', got {style!r}")
    if label is None:
        label = "sewn" if style == "cz" else "24"
    label = str(label).lower()
    if style == "cz":
        if label == "sewn":
            x_spec, z_spec = CZ_DEFAULT
        elif "/" in label:
            x_spec, z_spec = label.upper().split("/", 1)
        else:
            x_spec = z_spec = label.upper()
        for spec in (x_spec, z_spec):
            if sorted(spec) != ["E", "N", "S", "W"]:
                raise ValueError(
                    f"CZ ordering must permute NESW, got {spec!r} in {label!r}"
                )
        return Ordering("cz", x_spec, z_spec, label)
    if label in CZZ_ALIASES:
        x_spec, z_spec = CZZ_ALIASES[label]
    elif "/" in label:
        x_spec, z_spec = label.split("/", 1)
    else:
        x_spec = z_spec = label
    for spec in (x_spec, z_spec):
        if spec not in CZZ_PAIRINGS:
            raise ValueError(
                f"CZZ ordering must be a pairing in {sorted(CZZ_PAIRINGS)} "
                f"or an alias in {sorted(CZZ_ALIASES)}, got {label!r}"
            )
    return Ordering("czz", x_spec, z_spec, label)


@dataclass(frozen=True)
class Instruction:
    kind: str  # H | CZ | CZZ | InitZ | MeasZ
    qubits: tuple[int, ...]  # CZZ: (ancilla, data, data)
    timestep: int


class Circuit:
    """Immutable instruction schedule with detector/observable annotations.

    Measurement indices follow instruction order (timestep-major, qubit
    order within a timestep).  Detectors and observables are sets of
    absolute measurement indices whose parities are deterministic in a
    noiseless run.
    """

    def __init__(
        self,
        timesteps: list[list[Instruction]],
        n_qubits: int,
        n_data: int,
        detectors: list[tuple[int, ...]],
        observables: list[tuple[int, ...]],
        metadata: Optional[dict] = None,
    ):
        self.timesteps = timesteps
        self.n_qubits = n_qubits
        self.n_data = n_data
        self.detectors = detectors
        self.observables = observables
        self.metadata = dict(metadata or {})
        self.instructions: list[Instruction] = [
            ins for step in timesteps for ins in step
        ]
        self.measured_qubits: list[int] = [
            ins.qubits[0] for ins in self.instructions if ins.kind == "MeasZ"
        ]
        self._validate()

    @property
    def n_timesteps(self) -> int:
        return len(self.timesteps)

    @property
    def n_measurements(self) -> int:
        return len(self.measured_qubits)

    @property
    def n_detectors(self) -> int:
        return len(self.detectors)

    @property
    def n_observables(self) -> int:
        return len(self.observables)

    def _validate(self):
        for step in self.timesteps:
            seen: set[int] = set()
            for ins in step:
                for q in ins.qubits:
                    if q in seen:
                        raise AssertionError(
                            f"qubit {q} used twice in timestep {ins.timestep}"
                        )
                    seen.add(q)
        n_meas = self.n_measurements
        for group in self.detectors + self.observables:
            for idx in group:
                if not 0 <= idx < n_meas:
                    raise AssertionError(f"measurement index {idx} out of range")


@dataclass(frozen=True)
class NoiseModel:
    """Per-operation error strengths.

    ``SI`` gives idling qubits the same strength as a Hadamard (p/10);
    ``NI`` switches idle noise off entirely.  The CZZ strength carries a
    separate multiplier so the three-qubit gate can be taken worse than
    CZ.
    """

    model: str = "SI"
    p: float = 1e-3
    lambda_czz: float = 1.0

    def __post_init__(self):
        if self.model not in ("SI", "NI"):
            raise ValueError(f"noise model must be SI or NI, got {self.model!r}")
        if not 0.0 <= self.p <= 0.1:
            raise ValueError(f"base rate must be in [0, 0.1], got {self.p}")
        if not 0.0 <= self.lambda_czz * self.p <= 63 / 64:
            raise ValueError("CZZ strength out of range")

    @property
    def cz(self) -> float:
        return self.p

    @property
    def czz(self) -> float:
        return self.lambda_czz * self.p

    @property
    def h(self) -> float:
        return self.p / 10

    @property
    def init(self) -> float:
        return 2 * self.p

    @property
    def meas(self) -> float:
        return 5 * self.p

    @property
    def idle(self) -> float:
        return self.p / 10 if self.model == "SI" else 0.0

    @property
    def idle_mi(self) -> float:
        return self.p / 10 if self.model == "SI" else 0.0

    def strength(self, kind: str) -> float:
        return {
            "H": self.h,
            "CZ": self.cz,
            "CZZ": self.czz,
            "InitZ": self.init,
            "MeasZ": self.meas,
            "Idle": self.idle,
            "IdleMI": self.idle_mi,
        }[kind]


@dataclass(frozen=True)
class FaultLocation:
    """One noisy circuit location; faults at the same location are
    alternative Pauli realizations of a single physical event."""

    id: int
    kind: str  # H | CZ | CZZ | InitZ | MeasZ | Idle | IdleMI
    timestep: int
    qubits: tuple[int, ...]
    slot: str  # "pre" (before measurement) or "post"
    instruction_index: Optional[int] = None


@dataclass(frozen=True)
class ElementaryFault:
    location: FaultLocation
    pauli: PauliString  # on absolute circuit qubit ids
    probability: float


def _pauli_fan(qubits: tuple[int, ...]) -> list[PauliString]:
    """All non-identity Paulis supported on the given qubits."""
    n = len(qubits)
    out = []
    for code in range(1, 4**n):
        x = z = 0
        c = code
        for q in qubits:
            k = c % 4
            c //= 4
            if k in (1, 3):
                x |= 1 << q
            if k in (2, 3):
                z |= 1 << q
        out.append(PauliString(x=x, z=z))
    return out


def rescale_depolarizing(p: float, n: int) -> float:
    """Independent-Bernoulli rate reproducing n-qubit depolarizing noise.

    An n-qubit depolarizing channel of total strength ``p`` applies each
    of the 4**n - 1 non-identity Paulis with probability p/(4**n - 1).
    The same distribution over outcomes arises from 4**n - 1 independent
    Bernoulli events (one per Pauli, products combining) at rate::

        p_ind = 1/2 - 1/2 * (1 - 4**n/(4**n - 1) * p) ** (2**(1 - 2*n))

    Validated exactly in tests by convolving the independent events over
    the Pauli group.
    """
    if n < 1:
        raise ValueError(f"qubit count must be >= 1, got {n}")
    k = 4**n - 1
    if not 0.0 <= p <= k / (k + 1):
        raise ValueError(f"depolarizing strength {p} outside [0, {k/(k+1)}]")
    return 0.5 - 0.5 * (1.0 - (k + 1) / k * p) ** (2.0 ** (1 - 2 * n))


# ---------------------------------------------------------------------------
# gate scheduling


def _czz_groups(
    stab: StabilizerDef, pairing: str, kind: str
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    first, second = CZZ_PAIRINGS[pairing]
    if pairing == "ns":
        # Axis-aligned pairing schedules both same-type neighbors of a
        # data qubit in the same step; alternate the group order on a
        # sublattice checkerboard to keep timesteps conflict-free.
        x, y = stab.position
        if kind == "rotated":
            swap = (x // 2) % 2 == 1
        else:
            swap = (x // 2 + y // 2) % 2 == 1
        if swap:
            first, second = second, first
    return first, second


def _cycle_steps(
    layout: Layout, stabs: list[StabilizerDef], ordering: Ordering, spec: str
) -> list[list[tuple[str, int, tuple[int, ...]]]]:
    """Entangling schedule for one stabilizer type.

    Returns one gate list per timestep; each gate is
    ``(gate_kind, ancilla, data_qubits)``.
    """
    m = ENTANGLING_STEPS[ordering.style]
    steps: list[list[tuple[str, int, tuple[int, ...]]]] = [[] for _ in range(m)]
    for stab in stabs:
        anc = layout.ancilla_qubit(stab.index)
        if ordering.style == "cz":
            for j, direction in enumerate(spec):
                q = stab.neighbors.get(direction)
                if q is not None:
                    steps[j].append(("CZ", anc, (q,)))
        else:
            for j, group in enumerate(_czz_groups(stab, spec, layout.kind)):
                qubits = tuple(
                    sorted(
                        stab.neighbors[d] for d in group if d in stab.neighbors
                    )
                )
                if len(qubits) == 2:
                    steps[j].append(("CZZ", anc, qubits))
                elif len(qubits) == 1:
                    steps[j].append(("CZ", anc, qubits))
    return steps


class _Builder:
    def __init__(self, n_qubits: int):
        self.n_qubits = n_qubits
        self.timesteps: list[list[Instruction]] = []
        self.meas_index: dict[tuple[int, int], int] = {}  # (timestep, qubit)
        self._n_meas = 0

    def tick(self) -> int:
        self.timesteps.append([])
        return len(self.timesteps) - 1

    def add(self, kind: str, qubits: Iterable[int]):
        t = len(self.timesteps) - 1
        for q in sorted(qubits):
            self.timesteps[-1].append(Instruction(kind, (q,), t))
            if kind == "MeasZ":
                self.meas_index[(t, q)] = self._n_meas
                self._n_meas += 1

    def add_gates(self, gates: list[tuple[str, int, tuple[int, ...]]]):
        t = len(self.timesteps) - 1
        for kind, anc, data in sorted(gates, key=lambda g: g[1]):
            self.timesteps[-1].append(Instruction(kind, (anc,) + data, t))


def _build_rounds(
    layout: Layout,
    basis: str,
    rounds: int,
    ordering: Ordering,
    memory: bool,
) -> tuple[_Builder, dict[str, list[list[int]]], list[int]]:
    """Shared round schedule.

    Returns the builder, per-type ancilla measurement indices
    (``anc_meas[type][stab_offset][round]``), and the final data
    measurement indices (empty for gadgets).
    """
    x_stabs = layout.x_stabilizers
    z_stabs = layout.z_stabilizers
    xa = [layout.ancilla_qubit(s.index) for s in x_stabs]
    za = [layout.ancilla_qubit(s.index) for s in z_stabs]
    data = list(range(layout.n_data))
    x_steps = _cycle_steps(layout, x_stabs, ordering, ordering.x_spec)
    z_steps = _cycle_steps(layout, z_stabs, ordering, ordering.z_spec)
    m = ENTANGLING_STEPS[ordering.style]

    b = _Builder(layout.n_qubits)
    za_pending: list[tuple[int, int]] = []  # (round, timestep scheduled)

    meas_t: dict[str, list[list[int]]] = {
        "X": [[-1] * rounds for _ in x_stabs],
        "Z": [[-1] * rounds for _ in z_stabs],
    }

    for k in range(rounds):
        b.tick()
        b.add("InitZ", xa)
        if memory and k == 0:
            b.add("InitZ", data)
        b.tick()
        b.add("H", xa)
        if not (memory and basis == "X" and k == 0):
            b.add("H", data)
        if k > 0:
            b.add("H", za)
        for j in range(m):
            t = b.tick()
            if j == 0 and k > 0:
                b.add("MeasZ", za)
                for i, q in enumerate(za):
                    meas_t["Z"][i][k - 1] = b.meas_index[(t, q)]
            b.add_gates(x_steps[j])
            if j == m - 1:
                b.add("InitZ", za)
        b.tick()
        b.add("H", xa)
        b.add("H", data)
        b.add("H", za)
        for j in range(m):
            t = b.tick()
            if j == 0:
                b.add("MeasZ", xa)
                for i, q in enumerate(xa):
                    meas_t["X"][i][k] = b.meas_index[(t, q)]
            b.add_gates(z_steps[j])

    b.tick()
    b.add("H", za)
    if memory and basis == "X":
        b.add("H", data)
    t = b.tick()
    b.add("MeasZ", sorted(data) + za if memory else za)
    for i, q in enumerate(za):
        meas_t["Z"][i][rounds - 1] = b.meas_index[(t, q)]
    data_meas = [b.meas_index[(t, q)] for q in data] if memory else []
    return b, meas_t, data_meas


def build_memory_circuit(
    layout: Layout,
    basis: str = "Z",
    rounds: Optional[int] = None,
    style: str = "czz",
    ordering: Optional[str] = None,
    allow_non_ft: bool = False,
) -> Circuit:
    """Memory experiment: prepare, run readout rounds, measure out.

    Data qubits are prepared in the ``basis`` eigenstate, ``rounds``
    readout rounds run (default: the code distance), and data qubits are
    measured in the same basis.  Detectors compare the basis-type
    stabilizers across preparation, consecutive rounds, and final
    readout (``n_basis * (rounds+1)`` of them) and the opposite type
    across consecutive rounds only; the observable is the parity of the
    final data measurements on the logical support.

    Each detector is tagged with the stabilizer type that produced it
    (metadata key ``sectors``, one letter per detector in detector
    order), which is handy when inspecting syndrome data or error
    models by hand.

    The axis-aligned CZZ pairing (``ns``) halves the effective distance
    and is refused unless ``allow_non_ft`` is set.
    """
    if basis not in ("X", "Z"):
        raise ValueError(f"basis must be X or Z, got {basis!r}")
    if rounds is None:
        rounds = layout.d
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    ordr = resolve_ordering(style, ordering)
    if ordr.is_non_ft_diagonal and not allow_non_ft:
        raise ValueError(
            "the 'ns' pairing is not fault-tolerant; pass allow_non_ft=True "
            "to build it anyway"
        )

    b, meas_t, data_meas = _build_rounds(layout, basis, rounds, ordr, True)

    primary = "X" if basis == "X" else "Z"
    other = "Z" if basis == "X" else "X"
    p_stabs = layout.x_stabilizers if primary == "X" else layout.z_stabilizers
    tagged: list[tuple[tuple[int, ...], str]] = []
    for i, _ in enumerate(p_stabs):
        tagged.append(((meas_t[primary][i][0],), primary))
    for kind in (primary, other):
        rows = meas_t[kind]
        for i in range(len(rows)):
            for k in range(1, rounds):
                tagged.append((tuple(sorted((rows[i][k - 1], rows[i][k]))), kind))
    for i, stab in enumerate(p_stabs):
        members = [meas_t[primary][i][rounds - 1]]
        members += [data_meas[q] for q in sorted(stab.support)]
        tagged.append((tuple(sorted(members)), primary))
    tagged.sort(key=lambda t: (max(t[0]), t[0]))
    detectors = [det for det, _ in tagged]

    logical = layout.logical_x if basis == "X" else layout.logical_z
    observable = tuple(sorted(data_meas[q] for q in logical))

    return Circuit(
        b.timesteps,
        layout.n_qubits,
        layout.n_data,
        detectors,
        [observable],
        metadata={
            "kind": layout.kind,
            "d": layout.d,
            "basis": basis,
            "rounds": rounds,
            "style": ordr.style,
            "ordering": ordr.label,
            "circuit": "memory",
            "sectors": "".join(sector for _, sector in tagged),
        },
    )


def build_measurement_gadget(
    layout: Layout,
    rounds: Optional[int] = None,
    style: str = "czz",
    ordering: Optional[str] = None,
) -> Circuit:
    """Bare repeated-readout gadget for fault-set analysis.

    No data preparation or final data readout: the gadget must work on
    an arbitrary input state, so the only deterministic parities — and
    hence the only detectors — are consecutive-round comparisons of each
    stabilizer.  Any ordering is constructible here; deciding which ones
    are fault-tolerant is the point of the analysis.
    """
    if rounds is None:
        rounds = layout.d
    if rounds < 2:
        raise ValueError(f"gadget needs >= 2 rounds for detectors, got {rounds}")
    ordr = resolve_ordering(style, ordering)
    b, meas_t, _ = _build_rounds(layout, "Z", rounds, ordr, False)
    tagged = []
    for kind in ("X", "Z"):
        for row in meas_t[kind]:
            for k in range(1, rounds):
                tagged.append((tuple(sorted((row[k - 1], row[k]))), kind))
    tagged.sort(key=lambda t: (max(t[0]), t[0]))
    return Circuit(
        b.timesteps,
        layout.n_qubits,
        layout.n_data,
        [det for det, _ in tagged],
        [],
        metadata={
            "kind": layout.kind,
            "d": layout.d,
            "rounds": rounds,
            "style": ordr.style,
            "ordering": ordr.label,
            "circuit": "gadget",
            "sectors": "".join(sector for _, sector in tagged),
        },
    )


# ---------------------------------------------------------------------------
# fault enumeration


def enumerate_faults(circuit: Circuit, noise: NoiseModel) -> list[ElementaryFault]:
    """All elementary faults with their channel probabilities.

    Gates and idles realize uniform depolarizing channels (one fault per
    non-identity Pauli at strength/(4**n - 1)); InitZ contributes a
    post-init bit flip and MeasZ a pre-measurement bit flip.  Idle
    locations cover every qubit without an instruction in a timestep,
    at measurement/initialization-timestep strength when the timestep
    contains any InitZ or MeasZ.  Zero-strength locations are omitted.
    """
    faults: list[ElementaryFault] = []
    loc_id = 0

    def emit(kind, timestep, qubits, slot, instr_idx, paulis, probs):
        nonlocal loc_id
        loc = FaultLocation(loc_id, kind, timestep, qubits, slot, instr_idx)
        loc_id += 1
        for pauli, prob in zip(paulis, probs):
            faults.append(ElementaryFault(loc, pauli, prob))

    instr_offset = 0
    for t, step in enumerate(circuit.timesteps):
        occupied: set[int] = set()
        has_mi = False
        for i, ins in enumerate(step):
            occupied.update(ins.qubits)
            if ins.kind in ("InitZ", "MeasZ"):
                has_mi = True
            idx = instr_offset + i
            if ins.kind == "MeasZ":
                if noise.meas > 0:
                    emit(
                        "MeasZ", t, ins.qubits, "pre", idx,
                        [PauliString(x=1 << ins.qubits[0])], [noise.meas],
                    )
            elif ins.kind == "InitZ":
                if noise.init > 0:
                    emit(
                        "InitZ", t, ins.qubits, "post", idx,
                        [PauliString(x=1 << ins.qubits[0])], [noise.init],
                    )
            else:
                strength = noise.strength(ins.kind)
                if strength > 0:
                    fan = _pauli_fan(ins.qubits)
                    prob = strength / len(fan)
                    emit(ins.kind, t, ins.qubits, "post", idx,
                         fan, [prob] * len(fan))
        instr_offset += len(step)
        idle_strength = noise.idle_mi if has_mi else noise.idle
        if idle_strength > 0:
            idle_kind = "IdleMI" if has_mi else "Idle"
            for q in range(circuit.n_qubits):
                if q not in occupied:
                    emit(
                        idle_kind, t, (q,), "post", None,
                        _pauli_fan((q,)), [idle_strength / 3] * 3,
                    )
    return faults


def count_fault_locations(circuit: Circuit) -> int:
    """Number of noisy instruction locations (idles excluded)."""
    return sum(1 for ins in circuit.instructions if ins.kind in GATE_KINDS)


# ---------------------------------------------------------------------------
# text format


def circuit_to_text(circuit: Circuit) -> str:
    lines: list[str] = []
    meta = circuit.metadata
    if meta:
        pairs = " ".join(f"{k}={meta[k]}" for k in sorted(meta))
        lines.append(f"# {pairs}")
    lines.append(f"# qubits={circuit.n_qubits} data={circuit.n_data}")
    kind_to_name = {"InitZ": "RZ", "MeasZ": "MZ", "H": "H"}
    for t, step in enumerate(circuit.timesteps):
        if t:
            lines.append("TICK")
        grouped: dict[str, list[int]] = {}
        for ins in step:
            if ins.kind in ("CZ", "CZZ"):
                lines.append(f"{ins.kind} {' '.join(map(str, ins.qubits))}")
            else:
                grouped.setdefault(ins.kind, []).append(ins.qubits[0])
        for kind in ("RZ", "H", "MZ"):
            src = {v: k for k, v in kind_to_name.items()}[kind]
            if src in grouped:
                lines.append(f"{kind} {' '.join(map(str, grouped[src]))}")
    for det in circuit.detectors:
        lines.append("DETECTOR " + " ".join(f"rec[{i}]" for i in det))
    for i, obs in enumerate(circuit.observables):
        lines.append(
            f"OBSERVABLE({i}) " + " ".join(f"rec[{j}]" for j in obs)
        )
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    timesteps: list[list[Instruction]] = [[]]
    detectors: list[tuple[int, ...]] = []
    observables: list[tuple[int, ...]] = []
    metadata: dict = {}
    n_qubits = 0
    n_data = 0
    name_to_kind = {"RZ": "InitZ", "MZ": "MeasZ", "H": "H"}

    def parse_recs(parts: list[str]) -> tuple[int, ...]:
        out = []
        for p in parts:
            if not (p.startswith("rec[") and p.endswith("]")):
                raise ValueError(f"bad measurement reference {p!r}")
            out.append(int(p[4:-1]))
        return tuple(out)

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    k, v = token.split("=", 1)
                    metadata.setdefault(k, v)
            continue
        parts = line.split()
        op = parts[0]
        t = len(timesteps) - 1
        if op == "TICK":
            timesteps.append([])
        elif op in ("RZ", "MZ", "H"):
            for q in map(int, parts[1:]):
                timesteps[-1].append(Instruction(name_to_kind[op], (q,), t))
        elif op in ("CZ", "CZZ"):
            qubits = tuple(map(int, parts[1:]))
            expected = 2 if op == "CZ" else 3
            if len(qubits) != expected:
                raise ValueError(f"{op} takes {expected} qubits: {line!r}")
            timesteps[-1].append(Instruction(op, qubits, t))
        elif op == "DETECTOR":
            detectors.append(parse_recs(parts[1:]))
        elif op.startswith("OBSERVABLE("):
            observables.append(parse_recs(parts[1:]))
        else:
            raise ValueError(f"unknown circuit line {line!r}")
    if "qubits" in metadata:
        n_qubits = int(metadata.pop("qubits"))
        n_data = int(metadata.pop("data"))
    else:
        n_qubits = 1 + max(
            (q for step in timesteps for ins in step for q in ins.qubits),
            default=-1,
        )
    for key in ("d", "rounds"):
        if key in metadata:
            metadata[key] = int(metadata[key])
    return Circuit(timesteps, n_qubits, n_data, detectors, observables, metadata)
