"""Circuit builder: census, detectors, determinism, faults, text format."""

import itertools

import pytest

from ftsurf.chp import check_determinism, simulate_outcomes
from ftsurf.circuits import (
    ENTANGLING_STEPS,
    NoiseModel,
    build_measurement_gadget,
    build_memory_circuit,
    circuit_from_text,
    circuit_to_text,
    count_fault_locations,
    enumerate_faults,
    rescale_depolarizing,
    resolve_ordering,
)
from ftsurf.layout import build_layout


def census_formula(kind, style, d):
    if kind == "rotated":
        return 10 * d**3 - 2 * d**2 - 4 * d if style == "cz" else 8 * d**3 - 4 * d
    if style == "cz":
        return 20 * d**3 - 20 * d**2 + 2 * d + 2
    return 16 * d**3 - 12 * d**2 - 2 * d + 2


@pytest.mark.parametrize("kind", ["rotated", "unrotated"])
@pytest.mark.parametrize("style", ["cz", "czz"])
@pytest.mark.parametrize("d", [3, 5, 7, 9])
def test_fault_location_census(kind, style, d):
    lay = build_layout(kind, d)
    circ = build_memory_circuit(lay, style=style)  # rounds defaults to d
    assert count_fault_locations(circ) == census_formula(kind, style, d)


def test_census_reference_values():
    # Spot values for the d=3 circuits.
    assert census_formula("rotated", "cz", 3) == 240
    assert census_formula("rotated", "czz", 3) == 204
    assert census_formula("unrotated", "cz", 3) == 368
    assert census_formula("unrotated", "czz", 3) == 320


def test_census_asymptotic_ratio():
    # CZ uses 10/8 = 20/16 = 5/4 the locations of CZZ as d grows.
    for kind in ("rotated", "unrotated"):
        r = census_formula(kind, "cz", 201) / census_formula(kind, "czz", 201)
        assert abs(r - 1.25) < 0.01


@pytest.mark.parametrize("kind", ["rotated", "unrotated"])
@pytest.mark.parametrize("style,ordering", [("czz", "24"), ("cz", "sewn")])
@pytest.mark.parametrize("basis", ["Z", "X"])
@pytest.mark.parametrize("rounds", [1, 2, 3])
def test_detector_count(kind, style, ordering, basis, rounds):
    lay = build_layout(kind, 3)
    circ = build_memory_circuit(
        lay, basis=basis, rounds=rounds, style=style, ordering=ordering
    )
    n_x = len(lay.x_stabilizers)
    n_z = len(lay.z_stabilizers)
    n_p, n_q = (n_x, n_z) if basis == "X" else (n_z, n_x)
    assert circ.n_detectors == n_p * (rounds + 1) + n_q * (rounds - 1)


def test_unrotated_three_round_example():
    lay = build_layout("unrotated", 3)
    circ = build_memory_circuit(lay, basis="Z", rounds=3, style="czz", ordering="24")
    assert circ.n_detectors == 36


def test_entangling_depth_per_round():
    lay = build_layout("rotated", 3)
    for style in ("cz", "czz"):
        circ = build_memory_circuit(lay, style=style, rounds=3)
        per_type = ENTANGLING_STEPS[style]
        entangling_steps = sum(
            1
            for step in circ.timesteps
            if any(i.kind in ("CZ", "CZZ") for i in step)
        )
        assert entangling_steps == 2 * per_type * 3


@pytest.mark.parametrize("kind", ["rotated", "unrotated"])
@pytest.mark.parametrize(
    "style,ordering",
    [("czz", "ne"), ("czz", "nw"), ("czz", "ns"), ("czz", "24"),
     ("czz", "21"), ("cz", "sewn"), ("cz", "swen")],
)
@pytest.mark.parametrize("basis,rounds", [("Z", 1), ("Z", 3), ("X", 3)])
def test_detectors_deterministic_d3(kind, style, ordering, basis, rounds):
    lay = build_layout(kind, 3)
    circ = build_memory_circuit(
        lay, basis=basis, rounds=rounds, style=style, ordering=ordering,
        allow_non_ft=True,
    )
    check_determinism(circ)


@pytest.mark.parametrize("kind,style,basis", [
    ("unrotated", "czz", "Z"), ("rotated", "cz", "X"),
])
def test_detectors_deterministic_d5(kind, style, basis):
    lay = build_layout(kind, 5)
    circ = build_memory_circuit(lay, basis=basis, style=style)
    check_determinism(circ)


@pytest.mark.parametrize("kind", ["rotated", "unrotated"])
@pytest.mark.parametrize("style", ["cz", "czz"])
def test_gadget_determinism_and_count(kind, style):
    lay = build_layout(kind, 3)
    g = build_measurement_gadget(lay, rounds=3, style=style)
    assert g.n_detectors == lay.n_stabilizers * 2
    assert g.n_observables == 0
    check_determinism(g)


def test_round0_primary_measurements_are_constant():
    # The basis-type stabilizers are fixed by preparation, so their very
    # first ancilla readout carries no randomness at all.
    lay = build_layout("unrotated", 3)
    circ = build_memory_circuit(lay, basis="Z", rounds=2, style="czz")
    outcomes = simulate_outcomes(circ)
    singletons = [d for d in circ.detectors if len(d) == 1]
    assert len(singletons) == len(lay.z_stabilizers)
    for (idx,) in singletons:
        assert outcomes[idx].deterministic


@pytest.mark.parametrize("basis", ["Z", "X"])
def test_data_hadamard_census(basis):
    # 2 data Hadamards per qubit per round, in either basis.
    lay = build_layout("rotated", 3)
    circ = build_memory_circuit(lay, basis=basis, rounds=3, style="czz")
    n_data_h = sum(
        1
        for ins in circ.instructions
        if ins.kind == "H" and ins.qubits[0] < lay.n_data
    )
    assert n_data_h == 2 * 3 * lay.n_data


def test_qubit_once_per_timestep_across_matrix():
    for kind, style, ordering in [
        ("rotated", "czz", "ns"), ("unrotated", "czz", "ns"),
        ("rotated", "czz", "24"), ("unrotated", "cz", "sewn"),
    ]:
        lay = build_layout(kind, 5)
        circ = build_memory_circuit(
            lay, style=style, ordering=ordering, allow_non_ft=True
        )
        for step in circ.timesteps:
            qubits = [q for ins in step for q in ins.qubits]
            assert len(qubits) == len(set(qubits))


def test_ns_requires_explicit_flag():
    lay = build_layout("unrotated", 3)
    with pytest.raises(ValueError, match="fault-tolerant"):
        build_memory_circuit(lay, style="czz", ordering="ns")
    build_memory_circuit(lay, style="czz", ordering="ns", allow_non_ft=True)


def test_ordering_validation():
    with pytest.raises(ValueError):
        resolve_ordering("czz", "sw")
    with pytest.raises(ValueError):
        resolve_ordering("cz", "NNEW")
    with pytest.raises(ValueError):
        resolve_ordering("cnot", "sewn")
    assert resolve_ordering("czz", None).label == "24"
    assert resolve_ordering("cz", None).x_spec == "SEWN"
    assert resolve_ordering("cz", None).z_spec == "SWEN"
    assert resolve_ordering("czz", "24").x_spec == "nw"
    assert resolve_ordering("czz", "24").z_spec == "ne"


def test_build_rejects_bad_args():
    lay = build_layout("rotated", 3)
    with pytest.raises(ValueError):
        build_memory_circuit(lay, basis="Y")
    with pytest.raises(ValueError):
        build_memory_circuit(lay, rounds=0)


# ---------------------------------------------------------------------------
# noise model and fault enumeration


def test_noise_model_strengths():
    nm = NoiseModel("SI", p=0.01, lambda_czz=1.5)
    assert nm.cz == 0.01
    assert nm.czz == pytest.approx(0.015)
    assert nm.h == pytest.approx(0.001)
    assert nm.init == pytest.approx(0.02)
    assert nm.meas == pytest.approx(0.05)
    assert nm.idle == pytest.approx(0.001)
    ni = NoiseModel("NI", p=0.01)
    assert ni.idle == 0.0 and ni.idle_mi == 0.0


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel("XY", p=0.01)
    with pytest.raises(ValueError):
        NoiseModel("SI", p=0.5)


@pytest.fixture(scope="module")
def small_circuit():
    lay = build_layout("unrotated", 3)
    return lay, build_memory_circuit(lay, basis="Z", rounds=3, style="czz")


def test_fault_probabilities_sum_to_strength(small_circuit):
    _, circ = small_circuit
    nm = NoiseModel("SI", p=0.004, lambda_czz=1.2)
    faults = enumerate_faults(circ, nm)
    by_loc = {}
    for f in faults:
        by_loc.setdefault(f.location, []).append(f)
    for loc, group in by_loc.items():
        total = sum(f.probability for f in group)
        expected = nm.strength(loc.kind)
        assert total == pytest.approx(expected), loc
        if loc.kind == "CZZ":
            assert len(group) == 63
            assert group[0].probability == pytest.approx(nm.czz / 63)
        elif loc.kind == "CZ":
            assert len(group) == 15
        elif loc.kind in ("H", "Idle", "IdleMI"):
            assert len(group) == 3
        elif loc.kind == "MeasZ":
            assert len(group) == 1
            assert loc.slot == "pre"
            assert str(group[0].pauli) == f"X{loc.qubits[0]}"
        elif loc.kind == "InitZ":
            assert len(group) == 1
            assert loc.slot == "post"


def test_fault_paulis_supported_on_location(small_circuit):
    _, circ = small_circuit
    faults = enumerate_faults(circ, NoiseModel("SI", p=0.001))
    for f in faults[:2000]:
        assert f.pauli.support() <= set(f.location.qubits)
        assert not f.pauli.is_identity()


def test_ni_has_no_idle_faults(small_circuit):
    _, circ = small_circuit
    faults = enumerate_faults(circ, NoiseModel("NI", p=0.002))
    assert all(f.location.kind not in ("Idle", "IdleMI") for f in faults)
    si = enumerate_faults(circ, NoiseModel("SI", p=0.002))
    kinds = {f.location.kind for f in si}
    assert "Idle" in kinds and "IdleMI" in kinds


def test_census_matches_enumeration(small_circuit):
    _, circ = small_circuit
    faults = enumerate_faults(circ, NoiseModel("NI", p=0.002))
    non_idle_locs = {f.location.id for f in faults}
    assert len(non_idle_locs) == count_fault_locations(circ) == 320


def test_zero_rate_enumerates_nothing(small_circuit):
    _, circ = small_circuit
    assert enumerate_faults(circ, NoiseModel("SI", p=0.0)) == []


# ---------------------------------------------------------------------------
# depolarizing rescale


def _independent_pauli_distribution(p_ind, n):
    """Exact outcome distribution of 4**n - 1 independent Pauli events."""
    size = 4**n
    dist = [0.0] * size
    dist[0] = 1.0
    for pauli in range(1, size):
        new = [0.0] * size
        for state, prob in enumerate(dist):
            new[state] += (1 - p_ind) * prob
            new[state ^ pauli] += p_ind * prob
        dist = new
    return dist


@pytest.mark.parametrize("n,p", [(1, 0.3), (1, 0.05), (2, 0.1), (3, 0.3)])
def test_rescale_reproduces_depolarizing_exactly(n, p):
    p_ind = rescale_depolarizing(p, n)
    dist = _independent_pauli_distribution(p_ind, n)
    assert dist[0] == pytest.approx(1 - p, abs=1e-12)
    k = 4**n - 1
    for outcome in range(1, 4**n):
        assert dist[outcome] == pytest.approx(p / k, abs=1e-12)


def test_rescale_reference_points():
    assert rescale_depolarizing(0.0, 2) == 0.0
    assert rescale_depolarizing(0.75, 1) == pytest.approx(0.5)
    # 1/2 - (1 - 16*0.1/15)**(1/8) / 2, cross-checked by the exact
    # convolution oracle above.
    assert rescale_depolarizing(0.1, 2) == pytest.approx(0.0070002526, abs=1e-9)


def test_rescale_rejects_out_of_range():
    with pytest.raises(ValueError):
        rescale_depolarizing(0.8, 1)
    with pytest.raises(ValueError):
        rescale_depolarizing(-0.1, 2)


# ---------------------------------------------------------------------------
# text format


def test_text_roundtrip(small_circuit):
    _, circ = small_circuit
    text = circuit_to_text(circ)
    back = circuit_from_text(text)
    assert back.n_qubits == circ.n_qubits
    assert back.n_data == circ.n_data
    assert len(back.timesteps) == len(circ.timesteps)
    for a, b in zip(circ.timesteps, back.timesteps):
        assert sorted((i.kind, i.qubits) for i in a) == sorted(
            (i.kind, i.qubits) for i in b
        )
    assert back.detectors == circ.detectors
    assert back.observables == circ.observables
    assert back.measured_qubits == circ.measured_qubits


def test_text_format_shape(small_circuit):
    _, circ = small_circuit
    text = circuit_to_text(circ)
    lines = text.splitlines()
    assert any(l.startswith("RZ ") for l in lines)
    assert any(l.startswith("MZ ") for l in lines)
    assert any(l.startswith("CZZ ") for l in lines)
    assert sum(1 for l in lines if l == "TICK") == circ.n_timesteps - 1
    assert sum(1 for l in lines if l.startswith("DETECTOR")) == circ.n_detectors
    assert sum(1 for l in lines if l.startswith("OBSERVABLE(0)")) == 1
    assert "rec[" in lines[-1]


def test_text_rejects_garbage():
    with pytest.raises(ValueError):
        circuit_from_text("WOBBLE 1 2\n")
    with pytest.raises(ValueError):
        circuit_from_text("CZ 1\n")
    with pytest.raises(ValueError):
        circuit_from_text("DETECTOR rec(3)\n")
