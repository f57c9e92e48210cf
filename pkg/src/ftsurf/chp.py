"""Stabilizer simulation with symbolic measurement outcomes.

A standard destabilizer/stabilizer tableau, except that generator signs
are affine forms over the "coins" of genuinely random measurements:
``sign = const XOR (XOR of coin bits)``.  Running a circuit noiselessly
then yields every measurement outcome as such a form, so a parity of
outcomes is deterministic iff the XOR of their forms has an empty coin
set — which is exactly the property detectors must have.

Pauli rows are stored as integer bitmasks; the phase of each generator
is tracked as a power of i (mod 4) plus a coin mask, and row products
use the usual group-law phase bookkeeping, vectorized over bits.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuits import Circuit

__all__ = ["OutcomeForm", "SymbolicTableau", "simulate_outcomes", "check_determinism"]


@dataclass(frozen=True)
class OutcomeForm:
    """Measurement outcome as an F2-affine form over coin variables."""

    const: int  # 0 or 1
    coins: int  # bitmask over coin ids

    def __xor__(self, other: "OutcomeForm") -> "OutcomeForm":
        return OutcomeForm(self.const ^ other.const, self.coins ^ other.coins)

    @property
    def deterministic(self) -> bool:
        return self.coins == 0


_ZERO = OutcomeForm(0, 0)


class SymbolicTableau:
    def __init__(self, n: int):
        self.n = n
        # rows 0..n-1 destabilizers (X_i), rows n..2n-1 stabilizers (Z_i)
        self.x = [1 << i for i in range(n)] + [0] * n
        self.z = [0] * n + [1 << i for i in range(n)]
        self.phase = [0] * (2 * n)  # power of i, mod 4
        self.coins = [0] * (2 * n)
        self.n_coins = 0

    # -- gates ----------------------------------------------------------

    def h(self, q: int):
        bit = 1 << q
        for i in range(2 * self.n):
            xb, zb = self.x[i] & bit, self.z[i] & bit
            if xb and zb:
                self.phase[i] = (self.phase[i] + 2) % 4
            if bool(xb) != bool(zb):
                self.x[i] ^= bit
                self.z[i] ^= bit

    def cz(self, a: int, b: int):
        abit, bbit = 1 << a, 1 << b
        for i in range(2 * self.n):
            xa = bool(self.x[i] & abit)
            xb = bool(self.x[i] & bbit)
            if xa and xb:
                za = bool(self.z[i] & abit)
                zb = bool(self.z[i] & bbit)
                if za != zb:
                    self.phase[i] = (self.phase[i] + 2) % 4
            if xa:
                self.z[i] ^= bbit
            if xb:
                self.z[i] ^= abit

    def czz(self, a: int, b: int, c: int):
        self.cz(a, b)
        self.cz(a, c)

    # -- row product bookkeeping -----------------------------------------

    def _g_sum(self, x1: int, z1: int, x2: int, z2: int) -> int:
        """Phase contribution (power of i, mod 4) of multiplying row 2
        into row 1, summed over qubits via bitmask case analysis."""
        ypos = x1 & z1
        xpos = x1 & ~z1
        zpos = z1 & ~x1
        plus = (ypos & z2 & ~x2) | (xpos & z2 & x2) | (zpos & x2 & ~z2)
        minus = (ypos & x2 & ~z2) | (xpos & z2 & ~x2) | (zpos & x2 & z2)
        return (plus.bit_count() - minus.bit_count()) % 4

    def _rowsum_into(
        self, x1, z1, ph1, co1, i2
    ) -> tuple[int, int, int, int]:
        ph = (ph1 + self.phase[i2] + self._g_sum(x1, z1, self.x[i2], self.z[i2])) % 4
        return x1 ^ self.x[i2], z1 ^ self.z[i2], ph, co1 ^ self.coins[i2]

    def _rowsum(self, h: int, i: int):
        self.x[h], self.z[h], self.phase[h], self.coins[h] = self._rowsum_into(
            self.x[h], self.z[h], self.phase[h], self.coins[h], i
        )

    # -- measurement and reset -------------------------------------------

    def measure_z(self, q: int) -> OutcomeForm:
        n = self.n
        bit = 1 << q
        p = next((i for i in range(n, 2 * n) if self.x[i] & bit), None)
        if p is not None:
            # Random outcome: a fresh coin.
            for i in range(2 * n):
                if i != p and (self.x[i] & bit):
                    self._rowsum(i, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.phase[p - n] = self.phase[p]
            self.coins[p - n] = self.coins[p]
            coin = 1 << self.n_coins
            self.n_coins += 1
            self.x[p] = 0
            self.z[p] = bit
            self.phase[p] = 0
            self.coins[p] = coin
            return OutcomeForm(0, coin)
        # Deterministic outcome: accumulate stabilizer rows whose
        # destabilizer partner anticommutes with Z_q.
        x = z = ph = co = 0
        for i in range(n):
            if self.x[i] & bit:
                x, z, ph, co = self._rowsum_into(x, z, ph, co, i + n)
        assert x == 0 and z == bit and ph % 2 == 0
        return OutcomeForm((ph // 2) % 2, co)

    def init_z(self, q: int):
        outcome = self.measure_z(q)
        if outcome.const or outcome.coins:
            # Conditional bit flip X^outcome: flips the sign of every
            # generator with Z support on q.
            bit = 1 << q
            for i in range(2 * self.n):
                if self.z[i] & bit:
                    self.phase[i] = (self.phase[i] + 2 * outcome.const) % 4
                    self.coins[i] ^= outcome.coins


def simulate_outcomes(circuit: Circuit) -> list[OutcomeForm]:
    """Noiseless run; one outcome form per measurement, in index order."""
    tab = SymbolicTableau(circuit.n_qubits)
    outcomes: list[OutcomeForm] = []
    for step in circuit.timesteps:
        for ins in step:
            if ins.kind == "H":
                tab.h(ins.qubits[0])
            elif ins.kind == "CZ":
                tab.cz(*ins.qubits)
            elif ins.kind == "CZZ":
                tab.czz(*ins.qubits)
            elif ins.kind == "InitZ":
                tab.init_z(ins.qubits[0])
            elif ins.kind == "MeasZ":
                outcomes.append(tab.measure_z(ins.qubits[0]))
            else:
                raise ValueError(f"unknown instruction kind {ins.kind!r}")
    return outcomes


def check_determinism(circuit: Circuit) -> None:
    """Assert every detector (and observable) parity is a noiseless
    constant, and that detectors are all zero."""
    outcomes = simulate_outcomes(circuit)
    for det in circuit.detectors:
        form = _ZERO
        for idx in det:
            form ^= outcomes[idx]
        if not form.deterministic:
            raise AssertionError(f"detector {det} depends on random outcomes")
        if form.const:
            raise AssertionError(f"detector {det} has nonzero noiseless parity")
    for obs in circuit.observables:
        form = _ZERO
        for idx in obs:
            form ^= outcomes[idx]
        if not form.deterministic:
            raise AssertionError(f"observable {obs} is not deterministic")
