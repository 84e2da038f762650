import numpy as np
import pytest

from covertjam import channel, nnet


def train_classifier(signal_type, snr_db, seed, epochs=50):
    rng = np.random.default_rng(seed)
    dataset = nnet.build_dataset(signal_type, snr_db, channel.Topology(), 20000, rng)
    model = nnet.init_model(16, 64, seed=seed)
    trained, trace = nnet.train(model, dataset, nnet.TrainConfig(epochs=epochs, seed=seed))
    return trained, dataset, trace


@pytest.fixture(scope="session")
def qpsk_snr3():
    return train_classifier("qpsk", 3.0, seed=101)


@pytest.fixture(scope="session")
def qpsk_snr10():
    return train_classifier("qpsk", 10.0, seed=102)


@pytest.fixture(scope="session")
def qam16_snr3():
    return train_classifier("qam16", 3.0, seed=103)


@pytest.fixture(scope="session")
def ofdm_snr5():
    return train_classifier("ofdm", 5.0, seed=104)


@pytest.fixture(scope="session")
def tiny_model():
    """Fast, weak classifier for tests that only need plumbing, not accuracy."""
    rng = np.random.default_rng(7)
    dataset = nnet.build_dataset("qpsk", 3.0, channel.Topology(), 3200, rng)
    model = nnet.init_model(4, 16, seed=7)
    trained, _ = nnet.train(model, dataset, nnet.TrainConfig(epochs=8, seed=7))
    return trained
