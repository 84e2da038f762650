"""Bit source, Gray-mapped QPSK/16QAM constellations, hard-decision demapping, BER.

Conventions (fixed, tested):
  * unit average constellation energy for both schemes,
  * most-significant bit first within each symbol,
  * QPSK: first bit -> I axis, second bit -> Q axis, bit 0 -> +1, bit 1 -> -1,
    so bits (0,0) map to (+1+1j)/sqrt(2),
  * 16QAM: per-axis Gray levels 00->-3, 01->-1, 11->+1, 10->+3, I axis from the
    first two bits, Q axis from the last two, scaled by 1/sqrt(10),
  * demapping picks the nearest constellation point; exact ties resolve to the
    lexicographically smallest bit label.
"""

from dataclasses import dataclass

import numpy as np

QPSK = "qpsk"
QAM16 = "qam16"

BITS_PER_SYMBOL = {QPSK: 2, QAM16: 4}

# Gray-coded PAM4 levels indexed by the 2-bit axis label (MSB first).
_PAM4_GRAY = {(0, 0): -3, (0, 1): -1, (1, 1): +1, (1, 0): +3}


@dataclass(frozen=True)
class ModulationScheme:
    kind: str

    def __post_init__(self):
        if self.kind not in BITS_PER_SYMBOL:
            raise ValueError(f"unknown modulation kind: {self.kind!r}")

    @property
    def bits_per_symbol(self) -> int:
        return BITS_PER_SYMBOL[self.kind]


def _build_table(kind: str) -> np.ndarray:
    """Constellation points indexed by the integer value of the bit label (MSB first)."""
    if kind == QPSK:
        table = np.empty(4, dtype=np.complex128)
        for b0 in (0, 1):
            for b1 in (0, 1):
                i = 1 - 2 * b0
                q = 1 - 2 * b1
                table[(b0 << 1) | b1] = (i + 1j * q) / np.sqrt(2.0)
        return table
    table = np.empty(16, dtype=np.complex128)
    for b0 in (0, 1):
        for b1 in (0, 1):
            for b2 in (0, 1):
                for b3 in (0, 1):
                    i = _PAM4_GRAY[(b0, b1)]
                    q = _PAM4_GRAY[(b2, b3)]
                    idx = (b0 << 3) | (b1 << 2) | (b2 << 1) | b3
                    table[idx] = (i + 1j * q) / np.sqrt(10.0)
    return table


_TABLES = {QPSK: _build_table(QPSK), QAM16: _build_table(QAM16)}


def constellation(s: ModulationScheme) -> np.ndarray:
    """Constellation table, index = bit label as an integer, MSB first."""
    return _TABLES[s.kind].copy()


def generate_bits(n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. uniform bits from the given generator stream."""
    if n < 0:
        raise ValueError("bit count must be nonnegative")
    return rng.integers(0, 2, size=n, dtype=np.int8)


def modulate(bits: np.ndarray, s: ModulationScheme) -> np.ndarray:
    """Map a bit vector onto the scheme's Gray-coded unit-energy constellation."""
    bits = np.asarray(bits, dtype=np.int8)
    k = s.bits_per_symbol
    if bits.size % k != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {k} ({s.kind})")
    groups = bits.reshape(-1, k)
    # integer label per symbol, MSB first
    weights = 1 << np.arange(k - 1, -1, -1)
    idx = groups @ weights
    return _TABLES[s.kind][idx]


def demodulate(symbols: np.ndarray, s: ModulationScheme) -> np.ndarray:
    """Hard-decision demapping to the bits of the nearest constellation point.

    Ties go to the lowest index, i.e. the lexicographically smallest bit label.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    table = _TABLES[s.kind]
    # |r - c|^2 for every point; argmin returns the first (smallest-label) winner
    d2 = np.abs(symbols[:, None] - table[None, :]) ** 2
    idx = np.argmin(d2, axis=1)
    k = s.bits_per_symbol
    shifts = np.arange(k - 1, -1, -1)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8).reshape(-1)


def ber(m: np.ndarray, m_hat: np.ndarray) -> float:
    """Fraction of differing bits between a sent and a decoded bit vector."""
    m = np.asarray(m)
    m_hat = np.asarray(m_hat)
    if m.size != m_hat.size:
        raise ValueError(f"length mismatch: {m.size} vs {m_hat.size}")
    if m.size == 0:
        raise ValueError("bit vectors must be nonempty")
    return float(np.mean(m != m_hat))
