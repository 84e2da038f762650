import pathlib

import pytest

HEADER = ("scenario,signal_type,snr_db,pnr_db,jammer,covertness_rate,ber,"
          "attack_success_rate,mean_epsilon,n_trials,seed")

# Snapshot of a real two-jammer sweep, used when the simulator's own artifact
# has not been generated in this checkout.
SAMPLE_ROWS = [
    "qpsk-snr3-dce1-adversarial,qpsk,3,-20,adversarial,0.042,0.09,0.042,0.2776,1000,3005",
    "qpsk-snr3-dce1-adversarial,qpsk,3,-12,adversarial,0.182,0.1122,0.182,0.6656,1000,3005",
    "qpsk-snr3-dce1-adversarial,qpsk,3,-8,adversarial,0.489,0.1316,0.489,0.9463,1000,3005",
    "qpsk-snr3-dce1-adversarial,qpsk,3,0,adversarial,0.999,0.1498,0.999,1.16,1000,3005",
    "qpsk-snr3-dce1-gaussian,qpsk,3,-20,gaussian,0.008,0.0776,0,0.28,1000,3005",
    "qpsk-snr3-dce1-gaussian,qpsk,3,-12,gaussian,0.008,0.085,0,0.7029,1000,3005",
    "qpsk-snr3-dce1-gaussian,qpsk,3,-8,gaussian,0.012,0.0932,0,1.1189,1000,3005",
    "qpsk-snr3-dce1-gaussian,qpsk,3,0,gaussian,0.001,0.1614,0,2.8049,1000,3005",
]

REAL_SWEEP = (pathlib.Path(__file__).resolve().parents[2]
              / "results" / "fig2_qpsk_snr3.csv")


@pytest.fixture
def sweep_csv(tmp_path):
    """The genuine simulator sweep when present, else the bundled snapshot."""
    if REAL_SWEEP.is_file():
        return REAL_SWEEP
    path = tmp_path / "fig2_sample.csv"
    path.write_text(HEADER + "\n" + "\n".join(SAMPLE_ROWS) + "\n")
    return path


@pytest.fixture
def header_only_csv(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(HEADER + "\n")
    return path


@pytest.fixture
def single_row_csv(tmp_path):
    path = tmp_path / "single.csv"
    path.write_text(HEADER + "\n" + SAMPLE_ROWS[2] + "\n")
    return path
