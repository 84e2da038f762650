"""Covert wireless communication by gradient-crafted cooperative jamming.

A transmitter talks to its receiver while an eavesdropper runs a small CNN to
decide "signal" vs "noise" on 16-sample I/Q blocks. A cooperative jammer
superposes a minimal-power perturbation, found by bisecting a targeted
gradient step, so the eavesdropper labels the transmission as noise while the
receiver's bit error rate stays bounded.
"""

from . import attack, channel, cli, harness, modem, nnet, waveform5g

__all__ = ["attack", "channel", "cli", "harness", "modem", "nnet", "waveform5g"]
__version__ = "0.1.0"
