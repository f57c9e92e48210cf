"""Detector error models: fault propagation, merging, decomposition, sampling.

Every elementary fault is pushed through the circuit to a *signature* —
the set of detectors it flips, the logical observables it flips, and the
residual Pauli left on the data qubits at the end.  Faults sharing a
(detectors, observables) signature are merged into one independent error
channel with the XOR-combined probability p*(1-q) + q*(1-p).

Gate and idle locations are depolarizing channels; their per-Pauli
probabilities are first converted to the equivalent independent-Bernoulli
rate (see ``rescale_depolarizing``) so that the merge arithmetic treats
every elementary event as independent.  Initialization and measurement
flips already are independent Bernoulli events and enter unchanged.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .circuits import (
    Circuit,
    ElementaryFault,
    NoiseModel,
    enumerate_faults,
    rescale_depolarizing,
)
from .pauli import PauliString, conjugate

__all__ = [
    "FaultSignature",
    "PropagationResult",
    "propagate_pauli",
    "propagate_faults",
    "ErrorChannel",
    "DetectorErrorModel",
    "build_dem",
    "decompose_dem",
    "DecompositionReport",
    "sample_words",
    "sample_shots",
    "words_to_bits",
    "bits_to_words",
    "dem_to_text",
    "dem_from_text",
]

_DEPOLARIZING_KINDS = frozenset(("H", "CZ", "CZZ", "Idle", "IdleMI"))


@dataclass(frozen=True)
class FaultSignature:
    """Effect of one fault: bitmasks over detectors, observables, and the
    residual X/Z components on data qubits at the end of the circuit."""

    detectors: int
    observables: int
    final_x: int
    final_z: int

    @property
    def trivial(self) -> bool:
        return self.detectors == 0 and self.observables == 0


def propagate_pauli(
    circuit: Circuit, pauli: PauliString, timestep: int, slot: str = "post"
) -> FaultSignature:
    """Walk a single Pauli through the circuit (reference implementation).

    ``slot="pre"`` injects before the instructions of ``timestep`` (the
    measurement-flip convention), ``"post"`` after them.  Kept deliberately
    scalar — the batch propagator is validated against this walk.
    """
    if slot not in ("pre", "post"):
        raise ValueError(f"slot must be 'pre' or 'post', got {slot!r}")
    err = PauliString.identity()
    flips: list[int] = []
    meas_counter = 0
    for t, step in enumerate(circuit.timesteps):
        if t == timestep and slot == "pre":
            err = err * pauli
        for ins in step:
            if ins.kind == "MeasZ":
                q = ins.qubits[0]
                if (err.x >> q) & 1:
                    flips.append(meas_counter)
                meas_counter += 1
                err = PauliString(x=err.x, z=err.z & ~(1 << q))
            elif ins.kind == "InitZ":
                q = ins.qubits[0]
                err = PauliString(x=err.x & ~(1 << q), z=err.z & ~(1 << q))
            else:
                err = conjugate(err, ins.kind, ins.qubits)
        if t == timestep and slot == "post":
            err = err * pauli
    flip_set = set(flips)
    det_mask = 0
    for d, group in enumerate(circuit.detectors):
        if len(flip_set.intersection(group)) % 2:
            det_mask |= 1 << d
    obs_mask = 0
    for o, group in enumerate(circuit.observables):
        if len(flip_set.intersection(group)) % 2:
            obs_mask |= 1 << o
    data_mask = (1 << circuit.n_data) - 1
    return FaultSignature(
        detectors=det_mask,
        observables=obs_mask,
        final_x=err.x & data_mask,
        final_z=err.z & data_mask,
    )


@dataclass
class PropagationResult:
    """Batch propagation output, row-aligned with the input fault list."""

    detectors: np.ndarray  # bool (n_faults, n_detectors)
    observables: np.ndarray  # bool (n_faults, n_observables)
    final_x: np.ndarray  # bool (n_faults, n_data)
    final_z: np.ndarray  # bool (n_faults, n_data)

    def signature(self, row: int) -> FaultSignature:
        return FaultSignature(
            detectors=_pack_int(self.detectors[row]),
            observables=_pack_int(self.observables[row]),
            final_x=_pack_int(self.final_x[row]),
            final_z=_pack_int(self.final_z[row]),
        )

    def signatures(self) -> list[FaultSignature]:
        return [self.signature(i) for i in range(self.detectors.shape[0])]


def _pack_int(bits: np.ndarray) -> int:
    return int.from_bytes(
        np.packbits(bits, bitorder="little").tobytes(), "little"
    )


def propagate_faults(
    circuit: Circuit,
    faults: Sequence[ElementaryFault],
    block_size: int = 65536,
) -> PropagationResult:
    """Propagate many faults at once via boolean column operations."""
    blocks = [
        _propagate_block(circuit, faults[i : i + block_size])
        for i in range(0, len(faults), block_size)
    ] or [_propagate_block(circuit, [])]
    return PropagationResult(
        detectors=np.concatenate([b[0] for b in blocks]),
        observables=np.concatenate([b[1] for b in blocks]),
        final_x=np.concatenate([b[2] for b in blocks]),
        final_z=np.concatenate([b[3] for b in blocks]),
    )


def _propagate_block(circuit, faults):
    n_f = len(faults)
    n_q = circuit.n_qubits
    x = np.zeros((n_f, n_q), dtype=bool)
    z = np.zeros((n_f, n_q), dtype=bool)
    flips = np.zeros((n_f, circuit.n_measurements), dtype=bool)
    inject: dict[tuple[int, str], list[tuple[int, PauliString]]] = defaultdict(list)
    for row, f in enumerate(faults):
        inject[(f.location.timestep, f.location.slot)].append((row, f.pauli))

    def _apply(entries):
        for row, pauli in entries:
            for q in pauli.x_support:
                x[row, q] ^= True
            for q in pauli.z_support:
                z[row, q] ^= True

    meas_counter = 0
    for t, step in enumerate(circuit.timesteps):
        _apply(inject.get((t, "pre"), ()))
        for ins in step:
            q = ins.qubits[0]
            if ins.kind == "MeasZ":
                flips[:, meas_counter] ^= x[:, q]
                meas_counter += 1
                z[:, q] = False
            elif ins.kind == "InitZ":
                x[:, q] = False
                z[:, q] = False
            elif ins.kind == "H":
                x[:, q], z[:, q] = z[:, q].copy(), x[:, q].copy()
            elif ins.kind == "CZ":
                a, b = ins.qubits
                za = z[:, a] ^ x[:, b]
                zb = z[:, b] ^ x[:, a]
                z[:, a] = za
                z[:, b] = zb
            elif ins.kind == "CZZ":
                a, b, c = ins.qubits
                z[:, b] ^= x[:, a]
                z[:, c] ^= x[:, a]
                z[:, a] ^= x[:, b] ^ x[:, c]
            else:  # pragma: no cover
                raise AssertionError(f"unknown instruction kind {ins.kind}")
        _apply(inject.get((t, "post"), ()))

    det = np.zeros((n_f, circuit.n_detectors), dtype=bool)
    for d, group in enumerate(circuit.detectors):
        det[:, d] = np.logical_xor.reduce(flips[:, list(group)], axis=1)
    obs = np.zeros((n_f, circuit.n_observables), dtype=bool)
    for o, group in enumerate(circuit.observables):
        obs[:, o] = np.logical_xor.reduce(flips[:, list(group)], axis=1)
    n_d = circuit.n_data
    return det, obs, x[:, :n_d].copy(), z[:, :n_d].copy()


# ---------------------------------------------------------------------------
# detector error model


@dataclass(frozen=True)
class ErrorChannel:
    """One independent error mechanism.

    ``components`` splits the channel into graphlike pieces (one or two
    detectors each); the pieces' detector sets and observable masks both
    XOR to the channel's own.  Splits borrowed from other faults'
    signatures absorb any observable mismatch into their last piece, so
    the split stays exact even when the borrowed geometry disagrees.
    """

    probability: float
    detectors: tuple[int, ...]
    observables: tuple[int, ...]
    sources: tuple[int, ...] = ()
    components: Optional[tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]] = None


@dataclass
class DetectorErrorModel:
    n_detectors: int
    n_observables: int
    channels: list[ErrorChannel]
    metadata: dict = field(default_factory=dict)

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def validate(self) -> None:
        for ch in self.channels:
            if not 0.0 < ch.probability < 1.0:
                raise ValueError(f"channel probability {ch.probability} out of range")
            if any(not 0 <= d < self.n_detectors for d in ch.detectors):
                raise ValueError(f"detector id out of range in {ch}")
            if any(not 0 <= o < self.n_observables for o in ch.observables):
                raise ValueError(f"observable id out of range in {ch}")
            if ch.components is not None:
                det = obs = 0
                for cd, co in ch.components:
                    det ^= _mask(cd)
                    obs ^= _mask(co)
                if det != _mask(ch.detectors) or obs != _mask(ch.observables):
                    raise ValueError(
                        f"components do not XOR to the channel targets: {ch}"
                    )


def _mask(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _bits(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def xor_probability(p: float, q: float) -> float:
    """Probability that exactly one of two independent events occurs."""
    return p * (1.0 - q) + q * (1.0 - p)


def build_dem(circuit: Circuit, noise: NoiseModel) -> DetectorErrorModel:
    """Propagate every elementary fault and merge by signature.

    Channels whose signature is empty (no detector and no observable is
    flipped) are dropped: they are exactly the faults that no decoder input
    can see or need to correct.

    Channels flipping more than two detectors carry a suggested split
    into graphlike pieces when one generating fault's X/Z parts or a
    sibling-fault pair provides an exact one (see
    :func:`_suggest_components`); the matching decoder uses those pieces
    as edges.
    """
    faults = enumerate_faults(circuit, noise)
    result = propagate_faults(circuit, faults)
    merged: dict[tuple[int, int], float] = {}
    sources: dict[tuple[int, int], set[int]] = defaultdict(set)
    reps: dict[tuple[int, int], ElementaryFault] = {}
    fans: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for row, fault in enumerate(faults):
        loc = fault.location
        if loc.kind in _DEPOLARIZING_KINDS:
            p_event = rescale_depolarizing(noise.strength(loc.kind), len(loc.qubits))
        else:
            p_event = fault.probability
        if p_event == 0.0:
            continue
        key = (
            _pack_int(result.detectors[row]),
            _pack_int(result.observables[row]),
        )
        if key == (0, 0):
            continue
        merged[key] = xor_probability(merged.get(key, 0.0), p_event)
        sources[key].add(loc.id)
        reps.setdefault(key, fault)
        fans[loc.id].append(key)
    channels = [
        ErrorChannel(
            probability=p,
            detectors=_bits(det),
            observables=_bits(obs),
            sources=tuple(sorted(sources[(det, obs)])),
        )
        for (det, obs), p in merged.items()
    ]
    channels.sort(key=lambda ch: (ch.detectors, ch.observables))
    _suggest_components(circuit, channels, reps, fans)
    meta = dict(circuit.metadata)
    meta.update(noise=noise.model, p=noise.p, lambda_czz=noise.lambda_czz)
    return DetectorErrorModel(
        n_detectors=circuit.n_detectors,
        n_observables=circuit.n_observables,
        channels=channels,
        metadata=meta,
    )


def _suggest_components(
    circuit: Circuit,
    channels: list[ErrorChannel],
    reps: dict[tuple[int, int], ElementaryFault],
    fans: dict[int, list[tuple[int, int]]],
) -> None:
    """Attach graphlike splits to >2-detector channels, in place.

    Two schemes are tried per channel, both exact in detectors and
    observables alike.  First the channel is split along one generating
    fault's X part and Z part (their signatures XOR to the channel's
    because propagation is linear in the Pauli factors).  When either
    part flips more than two detectors, a pair of sibling faults at the
    same circuit location whose signatures XOR to the channel's is used
    instead.  Channels fitting neither scheme are left whole for
    :func:`decompose_dem` to peel.
    """
    todo: list[tuple[int, tuple[int, int], ElementaryFault]] = []
    for idx, ch in enumerate(channels):
        if len(ch.detectors) > 2:
            key = (_mask(ch.detectors), _mask(ch.observables))
            todo.append((idx, key, reps[key]))
    if not todo:
        return
    parts: list[ElementaryFault] = []
    for _, _, fault in todo:
        parts.append(ElementaryFault(fault.location, PauliString(x=fault.pauli.x), 0.0))
        parts.append(ElementaryFault(fault.location, PauliString(z=fault.pauli.z), 0.0))
    result = propagate_faults(circuit, parts)
    sigs = [
        (_pack_int(result.detectors[r]), _pack_int(result.observables[r]))
        for r in range(len(parts))
    ]
    for k, (idx, key, fault) in enumerate(todo):
        cand = [s for s in (sigs[2 * k], sigs[2 * k + 1]) if s != (0, 0)]
        if len(cand) == 2 and all(
            1 <= bin(det).count("1") <= 2 for det, _ in cand
        ):
            pieces = cand
        else:
            pieces = _sibling_pair(key, fans.get(fault.location.id, ()))
            if pieces is None:
                continue
        channels[idx] = replace(
            channels[idx],
            components=_fold_pieces(
                channels[idx].observables,
                sorted((_bits(d), _bits(o)) for d, o in pieces),
            ),
        )


def _sibling_pair(
    key: tuple[int, int], fan: Iterable[tuple[int, int]]
) -> Optional[list[tuple[int, int]]]:
    """A pair of same-location fault signatures whose detector sets XOR
    to ``key``'s exactly, each flipping one or two detectors; None when
    no such pair exists.  The pair with the lowest first signature is
    returned.  Pieces carry the sibling faults' own observable masks;
    the caller folds any disagreement with the channel's mask into one
    piece, so the pair fixes the matching geometry while staying exact."""
    dm, _ = key
    members = sorted(set(fan))
    dets = {d for d, _ in members}
    for d1, o1 in members:
        if not 1 <= bin(d1).count("1") <= 2:
            continue
        d2 = dm ^ d1
        if d2 < d1:
            continue
        if 1 <= bin(d2).count("1") <= 2 and d2 in dets:
            o2 = min(o for d, o in members if d == d2)
            return [(d1, o1), (d2, o2)]
    return None


def _fold_pieces(
    observables: tuple[int, ...],
    pieces: list[tuple[tuple[int, ...], tuple[int, ...]]],
) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
    """Adjust piece observable masks to XOR to ``observables`` exactly,
    folding any mismatch into the last detector-carrying piece."""
    defect = _mask(observables)
    for _, po in pieces:
        defect ^= _mask(po)
    if defect:
        for j in range(len(pieces) - 1, -1, -1):
            if pieces[j][0]:
                pieces[j] = (pieces[j][0], _bits(_mask(pieces[j][1]) ^ defect))
                break
    return tuple(pieces)


# ---------------------------------------------------------------------------
# decomposition into graphlike components


@dataclass
class DecompositionReport:
    n_hyper: int = 0
    n_decomposed: int = 0
    undecomposed: list[int] = field(default_factory=list)  # channel indices


def channel_is_matchable(ch: ErrorChannel) -> bool:
    """True when the channel can serve directly as a matching-graph edge:
    at most two detectors."""
    return len(ch.detectors) <= 2


def decompose_dem(
    dem: DetectorErrorModel,
) -> tuple[DetectorErrorModel, DecompositionReport]:
    """Split every channel with more than two detectors into graphlike pieces.

    Channels that already carry a suggested split (models built from a
    circuit, or read from text with ``^`` groups) keep it.  For the rest,
    pieces are peeled greedily from the model's own matchable channels:
    at each step the largest edge lying inside the remaining detectors
    is removed (ties by lowest channel id).  Pieces start from the
    peeled edges' own observable masks; any disagreement with the
    channel's mask is folded into the last piece so the split stays
    exact.  The borrowed geometry is still only a hint — matching may
    pay for those edges with other channels' masks.  Channels with no
    full peel are left whole and listed in the report.
    """
    # per detector: catalog of matchable channels touching it, in channel order
    by_det: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
    for idx, ch in enumerate(dem.channels):
        if 1 <= len(ch.detectors) <= 2:
            entry = (idx, _mask(ch.detectors), _mask(ch.observables))
            for det in ch.detectors:
                by_det[det].append(entry)

    report = DecompositionReport()
    out: list[ErrorChannel] = []
    for ch in dem.channels:
        if channel_is_matchable(ch):
            out.append(ch)
            continue
        report.n_hyper += 1
        if ch.components is not None:
            report.n_decomposed += 1
            out.append(ch)
            continue
        remaining = _mask(ch.detectors)
        pieces: list[tuple[int, int]] = []
        while remaining:
            # peel the largest-overlap edge lying inside the remaining
            # detectors; ties broken by lowest channel id
            best = None
            for det in _bits(remaining):
                for idx, dmask, omask in by_det[det]:
                    if dmask & ~remaining:
                        continue
                    key = (-bin(dmask).count("1"), idx)
                    if best is None or key < best[0]:
                        best = (key, dmask, omask)
            if best is None:
                break
            _, dmask, omask = best
            pieces.append((dmask, omask))
            remaining &= ~dmask
        if remaining:
            report.undecomposed.append(len(out))
            out.append(ch)
            continue
        report.n_decomposed += 1
        components = _fold_pieces(
            ch.observables, [(_bits(det), _bits(obs)) for det, obs in pieces]
        )
        out.append(replace(ch, components=components))
    new = DetectorErrorModel(
        n_detectors=dem.n_detectors,
        n_observables=dem.n_observables,
        channels=out,
        metadata=dict(dem.metadata),
    )
    new.validate()
    return new, report


# ---------------------------------------------------------------------------
# sampling

_CHUNK = 4096
_DENSE_THRESHOLD = 0.002


def _channel_words(dem: DetectorErrorModel) -> tuple[np.ndarray, int]:
    """Per-channel flip masks packed into uint64 words: detector bits
    first, observable bits appended after them."""
    n_bits = dem.n_detectors + dem.n_observables
    n_words = max(1, (n_bits + 63) // 64)
    words = np.zeros((dem.n_channels, n_words), dtype=np.uint64)
    for i, ch in enumerate(dem.channels):
        for d in ch.detectors:
            words[i, d // 64] |= np.uint64(1) << np.uint64(d % 64)
        for o in ch.observables:
            bit = dem.n_detectors + o
            words[i, bit // 64] |= np.uint64(1) << np.uint64(bit % 64)
    return words, n_bits


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    key = (seed & 0xFFFFFFFFFFFFFFFF, (seed >> 64) & 0xFFFFFFFFFFFFFFFF)
    # The chunk index lives in the highest counter word: draws advance the
    # low word, so streams sit 2**192 ticks apart and can never overlap.
    return np.random.Generator(
        np.random.Philox(counter=[0, 0, 0, chunk_index], key=key)
    )


def sample_words(
    dem: DetectorErrorModel, shots: int, seed: int
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start_shot, words) chunks of sampled detector/observable data.

    Each chunk of 4096 shots is generated from its own counter-based RNG
    stream, so the output is a pure function of (dem, shots, seed) —
    independent of chunk scheduling or worker count.  Bit ``i`` of a row
    is detector ``i`` for ``i < n_detectors``, observable ``i -
    n_detectors`` otherwise.
    """
    if shots < 0:
        raise ValueError(f"shots must be >= 0, got {shots}")
    words, _ = _channel_words(dem)
    probs = np.array([ch.probability for ch in dem.channels], dtype=np.float64)
    dense_ids = np.flatnonzero(probs > _DENSE_THRESHOLD)
    thin_ids = np.flatnonzero((probs <= _DENSE_THRESHOLD) & (probs > 0))
    thin_probs = probs[thin_ids]
    n_words = words.shape[1]
    for chunk_index in range((shots + _CHUNK - 1) // _CHUNK):
        rng = _chunk_rng(seed, chunk_index)
        buf = np.zeros((_CHUNK, n_words), dtype=np.uint64)
        for ci in dense_ids:
            hit = rng.random(_CHUNK) < probs[ci]
            buf[hit] ^= words[ci]
        if thin_ids.size:
            counts = rng.binomial(_CHUNK, thin_probs)
            total = int(counts.sum())
            if total:
                channel_rep = np.repeat(thin_ids, counts)
                rows = rng.integers(0, _CHUNK, size=total)
                rows = _dedupe_rows(rng, channel_rep, counts, thin_ids, rows)
                order = np.argsort(rows, kind="stable")
                rows_sorted = rows[order]
                gathered = words[channel_rep[order]]
                starts = np.flatnonzero(
                    np.r_[True, rows_sorted[1:] != rows_sorted[:-1]]
                )
                reduced = np.bitwise_xor.reduceat(gathered, starts, axis=0)
                buf[rows_sorted[starts]] ^= reduced
        start = chunk_index * _CHUNK
        yield start, buf[: min(_CHUNK, shots - start)]


def _dedupe_rows(rng, channel_rep, counts, thin_ids, rows):
    """Redraw row indices until no channel hits the same shot twice, making
    each channel's hit set a uniform k-subset rather than k draws with
    replacement."""
    for _ in range(200):
        key = channel_rep.astype(np.int64) * _CHUNK + rows
        sorted_key = np.sort(key)
        dup_keys = sorted_key[1:][sorted_key[1:] == sorted_key[:-1]]
        if not dup_keys.size:
            return rows
        bad_channels = np.unique(dup_keys // _CHUNK)
        redraw = np.isin(channel_rep, bad_channels)
        rows = rows.copy()
        rows[redraw] = rng.integers(0, _CHUNK, size=int(redraw.sum()))
    raise RuntimeError("row dedup did not converge; channel probability too high")


def sample_shots(
    dem: DetectorErrorModel, shots: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sample and unpack into boolean (shots, n_detectors) and
    (shots, n_observables) arrays.  Convenience wrapper for tests and
    small runs; large runs should consume :func:`sample_words` chunkwise."""
    det = np.zeros((shots, dem.n_detectors), dtype=bool)
    obs = np.zeros((shots, dem.n_observables), dtype=bool)
    for start, words in sample_words(dem, shots, seed):
        bits = words_to_bits(words, dem.n_detectors + dem.n_observables)
        det[start : start + len(words)] = bits[:, : dem.n_detectors]
        obs[start : start + len(words)] = bits[:, dem.n_detectors :]
    return det, obs


def words_to_bits(words: np.ndarray, n_bits: int) -> np.ndarray:
    """Unpack little-endian uint64 rows into a boolean (rows, n_bits) array."""
    raw = words.astype("<u8").view(np.uint8)
    bits = np.unpackbits(raw, axis=1, bitorder="little")
    return bits[:, :n_bits].astype(bool)


def bits_to_words(bits: np.ndarray, n_bits: int) -> np.ndarray:
    """Pack a boolean (rows, n_bits) array into little-endian uint64 rows."""
    n_words = max(1, (n_bits + 63) // 64)
    packed = np.packbits(bits, axis=1, bitorder="little")
    out = np.zeros((bits.shape[0], n_words * 8), dtype=np.uint8)
    out[:, : packed.shape[1]] = packed
    return out.view("<u8")


# ---------------------------------------------------------------------------
# text format


def dem_to_text(dem: DetectorErrorModel) -> str:
    """Serialize; decomposed channels list their pieces joined by ``^``
    (shared detectors appear in both pieces and cancel in the XOR)."""
    lines = [f"# detectors={dem.n_detectors} observables={dem.n_observables}"]
    for key in sorted(dem.metadata):
        lines.append(f"# {key}={dem.metadata[key]}")
    for ch in dem.channels:
        if ch.components is not None:
            body = " ^ ".join(
                " ".join(
                    [f"D{d}" for d in cd] + [f"L{o}" for o in co]
                )
                for cd, co in ch.components
            )
        else:
            body = " ".join(
                [f"D{d}" for d in ch.detectors] + [f"L{o}" for o in ch.observables]
            )
        lines.append(f"error({ch.probability!r}) {body}".rstrip())
    return "\n".join(lines) + "\n"


def dem_from_text(text: str) -> DetectorErrorModel:
    n_det = n_obs = None
    metadata: dict = {}
    channels: list[ErrorChannel] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" not in token:
                    continue
                key, value = token.split("=", 1)
                if key == "detectors":
                    n_det = int(value)
                elif key == "observables":
                    n_obs = int(value)
                else:
                    metadata[key] = _parse_meta(value)
            continue
        if not line.startswith("error(") or ")" not in line:
            raise ValueError(f"line {lineno}: expected 'error(p) ...', got {line!r}")
        head, _, tail = line.partition(")")
        prob = float(head[len("error("):])
        components = []
        for part in tail.split("^"):
            det: list[int] = []
            obs: list[int] = []
            for token in part.split():
                if token.startswith("D"):
                    det.append(int(token[1:]))
                elif token.startswith("L"):
                    obs.append(int(token[1:]))
                else:
                    raise ValueError(f"line {lineno}: bad target {token!r}")
            components.append((tuple(det), tuple(obs)))
        det_mask = obs_mask = 0
        for cd, co in components:
            det_mask ^= _mask(cd)
            obs_mask ^= _mask(co)
        channels.append(
            ErrorChannel(
                probability=prob,
                detectors=_bits(det_mask),
                observables=_bits(obs_mask),
                components=tuple(components) if len(components) > 1 else None,
            )
        )
    if n_det is None or n_obs is None:
        raise ValueError("missing '# detectors=N observables=M' header")
    dem = DetectorErrorModel(n_det, n_obs, channels, metadata)
    dem.validate()
    return dem


def _parse_meta(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value
