"""Flat path-loss links with circularly-symmetric complex Gaussian noise.

A link applies the same scalar amplitude gain h = (d0/d)^gamma to every sample
and adds i.i.d. CN(0, noise_power) noise (noise_power/2 per real dimension).
SNR here always means received signal power over noise power; PNR means the
jammer's transmit perturbation power per block over the noise power in that
block. Both axes share the per-sample noise variance as their reference.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinkSpec:
    d_ij: float
    d0: float = 1.0
    gamma: float = 2.8
    noise_power: float = 0.0

    def __post_init__(self):
        if self.d_ij <= 0:
            raise ValueError("link distance must be positive")
        if self.d0 <= 0:
            raise ValueError("reference distance must be positive")
        if self.gamma < 0:
            raise ValueError("path loss exponent must be nonnegative")
        if self.noise_power < 0:
            raise ValueError("noise power must be nonnegative")


@dataclass(frozen=True)
class Topology:
    """Distances of the four directed links (transmitter/jammer -> receiver/eavesdropper)."""

    d_tr: float = 1.0
    d_te: float = 1.0
    d_cr: float = 1.0
    d_ce: float = 1.0

    def __post_init__(self):
        for name in ("d_tr", "d_te", "d_cr", "d_ce"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def path_gain(link: LinkSpec) -> float:
    """Amplitude gain h = (d0/d)^gamma, applied identically to every sample."""
    return float((link.d0 / link.d_ij) ** link.gamma)


def complex_noise(n: int, power: float, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. CN(0, power) samples; real and imaginary parts drawn in that order."""
    if power == 0.0:
        return np.zeros(n, dtype=np.complex128)
    scale = np.sqrt(power / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def apply_link(x: np.ndarray, link: LinkSpec, rng: np.random.Generator) -> np.ndarray:
    """h*x + n with n ~ CN(0, noise_power) per sample."""
    x = np.asarray(x, dtype=np.complex128)
    h = path_gain(link)
    return h * x + complex_noise(x.size, link.noise_power, rng).reshape(x.shape)


def ratio_from_db(v: float) -> float:
    return float(10.0 ** (v / 10.0))


def db_from_ratio(r: float) -> float:
    if r <= 0:
        raise ValueError("ratio must be positive to convert to dB")
    return float(10.0 * np.log10(r))


def noise_power_for_snr(snr_db: float, received_signal_power: float) -> float:
    """Per-sample noise variance that realizes the given received SNR."""
    if received_signal_power <= 0:
        raise ValueError("received signal power must be positive")
    return received_signal_power / ratio_from_db(snr_db)


def received_pnr_db(pnr_db: float, d_ce: float, d0: float = 1.0, gamma: float = 2.8) -> float:
    """PNR as seen at the eavesdropper input rather than at the jammer output.

    The sweep axis is defined at the jammer output; the jammer-to-eavesdropper
    gain shifts it by 20*gamma*log10(d0/d_ce) dB on reception.
    """
    h = path_gain(LinkSpec(d_ij=d_ce, d0=d0, gamma=gamma))
    return pnr_db + db_from_ratio(h * h)
