"""Simplified 5G-like uplink chain: CRC-16 framing, QPSK subcarriers, CP-OFDM.

The chain is CRC attach -> QPSK map -> subcarrier mapping -> unitary IFFT ->
cyclic prefix, and the inverse with one-tap equalization on the known flat
gain. Error correction is out of scope: the CRC only detects. Data rides on
used_subcarriers bins placed symmetrically around DC (DC itself unused), so
used_subcarriers must stay below fft_size.
"""

from dataclasses import dataclass

import numpy as np

from . import modem

CRC_POLY = 0x1021  # CRC-16-CCITT
CRC_LEN = 16


@dataclass(frozen=True)
class OfdmConfig:
    fft_size: int = 64
    cp_len: int = 8
    used_subcarriers: int = 48
    subcarrier_spacing_hz: float = 15e3  # informational only under a flat channel

    def __post_init__(self):
        if not 0 < self.used_subcarriers < self.fft_size:
            raise ValueError("need 0 < used_subcarriers < fft_size (DC bin is reserved)")
        if not 0 <= self.cp_len < self.fft_size:
            raise ValueError("need 0 <= cp_len < fft_size")

    @property
    def symbol_len(self) -> int:
        return self.fft_size + self.cp_len

    @property
    def bits_per_symbol(self) -> int:
        # QPSK on every used bin
        return 2 * self.used_subcarriers


@dataclass(frozen=True)
class TransportBlock:
    payload: np.ndarray
    crc: np.ndarray

    @property
    def bits(self) -> np.ndarray:
        return np.concatenate([self.payload, self.crc])


def _crc16(bits: np.ndarray) -> int:
    """Bit-serial polynomial long division, MSB first, zero-initialized register."""
    reg = 0
    for b in bits:
        reg ^= int(b) << 15
        if reg & 0x8000:
            reg = ((reg << 1) ^ CRC_POLY) & 0xFFFF
        else:
            reg = (reg << 1) & 0xFFFF
    return reg


def crc_attach(payload: np.ndarray) -> TransportBlock:
    payload = np.asarray(payload, dtype=np.int8)
    if payload.size == 0:
        raise ValueError("payload must be nonempty")
    reg = _crc16(payload)
    crc = np.array([(reg >> (15 - i)) & 1 for i in range(CRC_LEN)], dtype=np.int8)
    return TransportBlock(payload=payload, crc=crc)


def crc_check(block: TransportBlock) -> bool:
    return bool(np.array_equal(crc_attach(block.payload).crc, block.crc))


def data_bins(cfg: OfdmConfig) -> np.ndarray:
    """Used FFT bin indices: frequencies -n_neg..-1, +1..+n_pos around DC, in that order."""
    n_neg = cfg.used_subcarriers // 2
    n_pos = cfg.used_subcarriers - n_neg
    freqs = np.concatenate([np.arange(-n_neg, 0), np.arange(1, n_pos + 1)])
    return freqs % cfg.fft_size


def ofdm_modulate(symbols: np.ndarray, cfg: OfdmConfig) -> np.ndarray:
    """Map symbols onto the used bins, unitary IFFT, prepend the cyclic prefix."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.size % cfg.used_subcarriers != 0:
        raise ValueError(
            f"symbol count {symbols.size} not divisible by {cfg.used_subcarriers} used subcarriers"
        )
    bins = data_bins(cfg)
    groups = symbols.reshape(-1, cfg.used_subcarriers)
    out = np.empty((groups.shape[0], cfg.symbol_len), dtype=np.complex128)
    for i, grp in enumerate(groups):
        spectrum = np.zeros(cfg.fft_size, dtype=np.complex128)
        spectrum[bins] = grp
        time = np.fft.ifft(spectrum, norm="ortho")
        out[i, : cfg.cp_len] = time[cfg.fft_size - cfg.cp_len :]
        out[i, cfg.cp_len :] = time
    return out.reshape(-1)


def ofdm_demodulate(samples: np.ndarray, cfg: OfdmConfig, h: complex) -> np.ndarray:
    """Strip CP, unitary FFT, divide the used bins by the one-tap gain h."""
    samples = np.asarray(samples, dtype=np.complex128)
    if h == 0:
        raise ValueError("channel gain must be nonzero for equalization")
    if samples.size % cfg.symbol_len != 0:
        raise ValueError(
            f"sample count {samples.size} not a multiple of symbol length {cfg.symbol_len}"
        )
    bins = data_bins(cfg)
    blocks = samples.reshape(-1, cfg.symbol_len)[:, cfg.cp_len :]
    spectra = np.fft.fft(blocks, norm="ortho", axis=1)
    return (spectra[:, bins] / h).reshape(-1)


def frame_tx(payload: np.ndarray, cfg: OfdmConfig) -> np.ndarray:
    """CRC attach, QPSK map, OFDM modulate. payload+CRC must fill whole OFDM symbols."""
    block = crc_attach(payload)
    bits = block.bits
    if bits.size % cfg.bits_per_symbol != 0:
        raise ValueError(
            f"payload+CRC is {bits.size} bits; must be a multiple of "
            f"{cfg.bits_per_symbol} bits per OFDM symbol"
        )
    syms = modem.modulate(bits, modem.ModulationScheme(modem.QPSK))
    return ofdm_modulate(syms, cfg)


def frame_rx(
    samples: np.ndarray, cfg: OfdmConfig, h: complex, payload_len: int
) -> tuple[np.ndarray, bool]:
    """Inverse of frame_tx for a known payload length; returns (payload bits, crc_ok)."""
    syms = ofdm_demodulate(samples, cfg, h)
    bits = modem.demodulate(syms, modem.ModulationScheme(modem.QPSK))
    if payload_len + CRC_LEN != bits.size:
        raise ValueError(
            f"payload_len {payload_len} + CRC {CRC_LEN} does not match {bits.size} decoded bits"
        )
    payload = bits[:payload_len]
    crc = bits[payload_len:]
    ok = bool(np.array_equal(crc_attach(payload).crc, crc))
    return payload, ok
