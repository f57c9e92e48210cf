"""Pauli algebra: parsing, products, commutation, conjugation rules."""

import random

import pytest

from ftsurf.pauli import (
    PauliString,
    conjugate,
    conjugate_cz,
    conjugate_czz,
    conjugate_h,
)


def test_label_roundtrip():
    for label in ["I", "X0", "Z3", "Y7", "X0*Z3*Y7", "X1*X2*Z5"]:
        assert str(PauliString.from_label(label)) == label


def test_label_ordering_normalized():
    assert str(PauliString.from_label("Z3*X0")) == "X0*Z3"


def test_label_rejects_duplicates():
    with pytest.raises(ValueError):
        PauliString.from_label("X0*Z0")


def test_label_rejects_garbage():
    for bad in ["", "W1", "X", "X-1", "X0**Z1"]:
        with pytest.raises(ValueError):
            PauliString.from_label(bad)


def test_identity_and_weight():
    ident = PauliString.identity()
    assert ident.is_identity()
    assert ident.weight() == 0
    assert not ident
    p = PauliString.from_label("X0*Y2*Z4")
    assert p.weight() == 3
    assert p.support() == frozenset({0, 2, 4})
    assert p.pauli_at(2) == "Y"
    assert p.pauli_at(1) == "I"


def test_product_is_signless_xor():
    a = PauliString.from_label("X0*Z1")
    b = PauliString.from_label("Z0*Z1")
    assert str(a * b) == "Y0"
    assert (a * a).is_identity()


def test_commutation_basics():
    x0 = PauliString.from_label("X0")
    z0 = PauliString.from_label("Z0")
    z1 = PauliString.from_label("Z1")
    assert not x0.commutes_with(z0)
    assert x0.commutes_with(z1)
    y0 = PauliString.from_label("Y0")
    assert not y0.commutes_with(x0)
    assert not y0.commutes_with(z0)


def _random_pauli(rng, n=8):
    x = rng.getrandbits(n)
    z = rng.getrandbits(n)
    return PauliString(x=x, z=z)


def test_commutation_symplectic_oracle():
    rng = random.Random(20240)
    for _ in range(500):
        a = _random_pauli(rng)
        b = _random_pauli(rng)
        # Count qubit-wise anticommutations directly.
        anti = 0
        for q in range(8):
            pa, pb = a.pauli_at(q), b.pauli_at(q)
            if pa != "I" and pb != "I" and pa != pb:
                anti += 1
        assert a.commutes_with(b) == (anti % 2 == 0)


def test_h_swaps_x_and_z():
    p = PauliString.from_label("X0*Z1*Y2")
    assert str(conjugate_h(p, 0)) == "Z0*Z1*Y2"
    assert str(conjugate_h(p, 1)) == "X0*X1*Y2"
    assert str(conjugate_h(p, 2)) == "X0*Z1*Y2"  # Y is preserved up to sign


def test_cz_deposits_z_on_partner():
    assert str(conjugate_cz(PauliString.from_label("X0"), 0, 1)) == "X0*Z1"
    assert str(conjugate_cz(PauliString.from_label("X1"), 0, 1)) == "Z0*X1"
    assert str(conjugate_cz(PauliString.from_label("Z0"), 0, 1)) == "Z0"
    # The deposited Z cancels the Z component already present in Y0.
    assert str(conjugate_cz(PauliString.from_label("Y0*X1"), 0, 1)) == "X0*Y1"


def test_czz_matches_two_cz_on_all_three_qubit_paulis():
    # CZZ(a,b,c) is CZ(a,b) followed by CZ(a,c); check the conjugation
    # action agrees on every 3-qubit Pauli.
    for xbits in range(8):
        for zbits in range(8):
            p = PauliString(x=xbits, z=zbits)
            via_pair = conjugate_cz(conjugate_cz(p, 0, 1), 0, 2)
            assert conjugate_czz(p, 0, 1, 2) == via_pair


def test_czz_leg_actions():
    assert str(conjugate_czz(PauliString.from_label("X0"), 0, 1, 2)) == "X0*Z1*Z2"
    assert str(conjugate_czz(PauliString.from_label("X1"), 0, 1, 2)) == "Z0*X1"
    assert str(conjugate_czz(PauliString.from_label("X2"), 0, 1, 2)) == "Z0*X2"
    z = PauliString.from_label("Z0*Z1*Z2")
    assert conjugate_czz(z, 0, 1, 2) == z


def test_conjugation_preserves_commutation():
    rng = random.Random(77)
    gates = [("H", (0,)), ("H", (3,)), ("CZ", (1, 2)), ("CZ", (0, 4)),
             ("CZZ", (0, 1, 2)), ("CZZ", (4, 3, 5))]
    for _ in range(1000):
        a = _random_pauli(rng, n=6)
        b = _random_pauli(rng, n=6)
        gate, qubits = gates[rng.randrange(len(gates))]
        ca = conjugate(a, gate, qubits)
        cb = conjugate(b, gate, qubits)
        assert a.commutes_with(b) == ca.commutes_with(cb)


def test_conjugation_is_involutive_here():
    # H, CZ and CZZ are all self-inverse, so conjugating twice restores
    # the input.
    rng = random.Random(13)
    for _ in range(200):
        p = _random_pauli(rng, n=6)
        for gate, qubits in [("H", (2,)), ("CZ", (0, 5)), ("CZZ", (1, 3, 4))]:
            assert conjugate(conjugate(p, gate, qubits), gate, qubits) == p


def test_conjugate_rejects_unknown_gate():
    with pytest.raises(ValueError):
        conjugate(PauliString.identity(), "CNOT", (0, 1))
