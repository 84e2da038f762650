import numpy as np
import pytest

from covertjam import attack, channel, modem, nnet


def random_model(rng):
    return nnet.init_model(int(rng.integers(2, 8)), int(rng.integers(4, 32)),
                           seed=int(rng.integers(1 << 30)))


def always_signal_model(seed=5, bias=50.0):
    """Constant argmax (signal) but a non-flat loss surface."""
    m = nnet.init_model(4, 8, seed=seed)
    m.b2[nnet.SIGNAL] += bias
    return m


def test_direction_unit_norm_and_collinear():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = random_model(rng)
        x = rng.standard_normal((2, 16))
        d = attack.fgm_direction(m, x, nnet.NOISE)
        assert abs(np.linalg.norm(d) - 1.0) < 1e-9
        g = nnet.input_gradient(m, x, nnet.one_hot(nnet.NOISE))
        assert np.allclose(d * np.linalg.norm(g), g, rtol=0, atol=1e-12)


def test_direction_flat_loss_raises():
    with pytest.raises(attack.FlatLossSurfaceError):
        attack.fgm_direction(nnet.zero_model(2, 4), np.ones((2, 16)), nnet.NOISE)


def test_direction_is_descent_direction():
    rng = np.random.default_rng(1)
    eta = 1e-3
    hits = 0
    trials = 0
    while trials < 200:
        m = random_model(rng)
        x = rng.standard_normal((2, 16))
        try:
            d = attack.fgm_direction(m, x, nnet.NOISE)
        except attack.FlatLossSurfaceError:
            continue  # tiny model with every relu dead at x: no direction exists
        trials += 1
        before = nnet.loss(m, x, nnet.one_hot(nnet.NOISE))
        after = nnet.loss(m, x - eta * d, nnet.one_hot(nnet.NOISE))
        hits += after < before
    assert hits / trials >= 0.95


def test_config_validation():
    with pytest.raises(ValueError):
        attack.AttackConfig(p_max=0.0, eps_acc=0.1)
    with pytest.raises(ValueError):
        attack.AttackConfig(p_max=1.0, eps_acc=2.0)
    with pytest.raises(ValueError):
        attack.AttackConfig(p_max=1.0, eps_acc=0.1, h_ce=0.0)
    with pytest.raises(ValueError):
        attack.AttackConfig(p_max=1.0, eps_acc=0.1, target=7)


def test_already_noise_needs_no_perturbation(tiny_model):
    rng = np.random.default_rng(2)
    sigma2 = channel.noise_power_for_snr(3.0, 1.0)
    # pure noise blocks are (mostly) labeled noise already
    blocks = nnet.iq_from_complex(
        channel.complex_noise(16 * 64, sigma2, rng).reshape(64, 16))
    labels = nnet.predict(tiny_model, blocks)
    idx = int(np.flatnonzero(labels == nnet.NOISE)[0])
    cfg = attack.AttackConfig(p_max=1.0, eps_acc=0.01)
    res = attack.craft_perturbation(tiny_model, blocks[idx], cfg)
    assert res.success and res.epsilon == 0.0 and res.iterations == 0
    assert not np.any(res.delta)


def test_infeasible_attack_caps_at_budget():
    m = always_signal_model()
    rng = np.random.default_rng(3)
    x = rng.standard_normal((2, 16)) * 0.1
    cfg = attack.AttackConfig(p_max=0.25, eps_acc=0.01)
    res = attack.craft_perturbation(m, x, cfg)
    assert not res.success
    assert res.epsilon == pytest.approx(np.sqrt(cfg.p_max))
    assert res.iterations == 0
    # the transmitted block really is the full-budget attempt
    assert np.linalg.norm(res.delta) == pytest.approx(np.sqrt(cfg.p_max), abs=1e-9)


def test_flat_loss_block_reported_infeasible():
    res = attack.craft_perturbation(nnet.zero_model(2, 4), np.ones((2, 16)),
                                    attack.AttackConfig(p_max=1.0, eps_acc=0.1))
    # zero-weight model argmax-ties to "signal" and has no gradient anywhere
    assert not res.success
    assert not np.any(res.delta)
    assert res.iterations == 0


def received_qpsk_blocks(rng, n, snr_db=3.0):
    """Genuine received blocks from the distribution the fixtures train on."""
    sigma2 = channel.noise_power_for_snr(snr_db, 1.0)
    x = modem.modulate(modem.generate_bits(32 * n, rng), modem.ModulationScheme("qpsk"))
    r = x + channel.complex_noise(x.size, sigma2, rng)
    return nnet.iq_from_complex(r.reshape(n, 16))


def _blocks_and_results(model, rng, n, cfg):
    blocks = received_qpsk_blocks(rng, n)
    return blocks, attack.craft_perturbation_batch(model, blocks, cfg)


def test_bisection_iteration_count(tiny_model):
    rng = np.random.default_rng(4)
    p_max = 4.0
    cfg = attack.AttackConfig(p_max=p_max, eps_acc=np.sqrt(p_max) / 16)
    _, results = _blocks_and_results(tiny_model, rng, 100, cfg)
    for res in results:
        if res.success and res.epsilon > 0:
            assert res.iterations == 4  # ceil(log2(16)) halvings of the bracket
        assert res.iterations <= attack.iteration_bound(p_max, cfg.eps_acc)


def test_budget_never_violated(tiny_model):
    rng = np.random.default_rng(5)
    for p_max in (0.01, 0.5, 4.0):
        cfg = attack.AttackConfig(p_max=p_max, eps_acc=np.sqrt(p_max) / 32)
        _, results = _blocks_and_results(tiny_model, rng, 200, cfg)
        for res in results:
            assert np.linalg.norm(res.delta) ** 2 <= p_max + 1e-9


def test_success_flag_consistent_with_rerun(tiny_model):
    rng = np.random.default_rng(6)
    blocks = received_qpsk_blocks(rng, 300)
    cfg = attack.AttackConfig(p_max=2.0, eps_acc=np.sqrt(2.0) / 32, h_ce=1.7)
    results = attack.craft_perturbation_batch(tiny_model, blocks, cfg)
    for block, res in zip(blocks, results):
        perturbed = block + nnet.iq_from_complex(res.received_delta)
        label = int(np.argmax(nnet.forward_batch(tiny_model, perturbed)))
        assert (label == nnet.NOISE) == res.success


def test_bracket_witness_classified_signal(tiny_model):
    rng = np.random.default_rng(7)
    cfg = attack.AttackConfig(p_max=2.0, eps_acc=np.sqrt(2.0) / 64)
    found = 0
    for block, res in zip(*_blocks_and_results(tiny_model, rng, 200, cfg)):
        if not (res.success and res.epsilon > 0):
            continue
        found += 1
        assert res.bracket_lo is not None and res.bracket_lo < res.epsilon
        direction = -nnet.iq_from_complex(res.delta) / res.epsilon
        candidate = block - (cfg.h_ce * res.bracket_lo) * direction
        label = int(np.argmax(nnet.forward_batch(tiny_model, candidate)))
        assert label == nnet.SIGNAL
    assert found > 20


def test_single_and_batch_crafting_agree(tiny_model):
    rng = np.random.default_rng(8)
    cfg = attack.AttackConfig(p_max=1.5, eps_acc=np.sqrt(1.5) / 32, h_ce=0.8)
    blocks, batch = _blocks_and_results(tiny_model, rng, 50, cfg)
    for block, b in zip(blocks, batch):
        s = attack.craft_perturbation(tiny_model, block, cfg)
        assert s.success == b.success
        assert s.iterations == b.iterations
        assert s.epsilon == pytest.approx(b.epsilon, abs=1e-12)
        assert np.allclose(s.delta, b.delta, rtol=0, atol=1e-12)


def test_transmit_space_budget_under_strong_gain(tiny_model):
    # a close eavesdropper (large h_ce) must not let the *transmit* norm grow
    rng = np.random.default_rng(9)
    h_ce = channel.path_gain(channel.LinkSpec(0.5))  # about 6.96
    cfg = attack.AttackConfig(p_max=0.5, eps_acc=np.sqrt(0.5) / 32, h_ce=h_ce)
    blocks, results = _blocks_and_results(tiny_model, rng, 100, cfg)
    for res in results:
        assert np.linalg.norm(res.delta) ** 2 <= cfg.p_max + 1e-9
        assert np.allclose(res.received_delta, h_ce * res.delta, rtol=1e-12, atol=0)


def test_paper_literal_mode_contract(tiny_model):
    rng = np.random.default_rng(10)
    cfg = attack.AttackConfig(p_max=2.0, eps_acc=np.sqrt(2.0) / 32, paper_literal=True)
    blocks, results = _blocks_and_results(tiny_model, rng, 100, cfg)
    for block, res in zip(blocks, results):
        assert res.iterations <= attack.iteration_bound(cfg.p_max, cfg.eps_acc)
        assert np.linalg.norm(res.delta) ** 2 <= cfg.p_max + 1e-9
        perturbed = block + nnet.iq_from_complex(res.received_delta)
        label = int(np.argmax(nnet.forward_batch(tiny_model, perturbed)))
        assert (label == nnet.NOISE) == res.success


def test_received_to_transmit():
    rng = np.random.default_rng(11)
    d = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    assert np.array_equal(attack.received_to_transmit(d, 1.0), d)
    half = attack.received_to_transmit(d / np.linalg.norm(d), 2.0)
    assert np.linalg.norm(half) == pytest.approx(0.5, rel=1e-12)
    h = 3.7
    assert np.allclose(h * attack.received_to_transmit(d, h), d, rtol=1e-12, atol=0)
    with pytest.raises(ValueError):
        attack.received_to_transmit(d, 0.0)
    with pytest.raises(ValueError):
        attack.received_to_transmit(d, -1.0)


def test_gaussian_jam_zero_power():
    out = attack.gaussian_jam(0.0, np.random.default_rng(0))
    assert out.shape == (16,)
    assert not np.any(out)
    with pytest.raises(ValueError):
        attack.gaussian_jam(-1.0, np.random.default_rng(0))


def test_gaussian_jam_power_statistics():
    rng = np.random.default_rng(12)
    target = 3.0
    powers = [np.sum(np.abs(attack.gaussian_jam(target, rng)) ** 2) for _ in range(10_000)]
    assert abs(np.mean(powers) - target) / target < 0.03


def test_gaussian_jam_independent_streams():
    n = 10_000
    a = np.concatenate([attack.gaussian_jam(1.0, np.random.default_rng(100 + i))
                        for i in range(n // 16)])
    b = np.concatenate([attack.gaussian_jam(1.0, np.random.default_rng(900_000 + i))
                        for i in range(n // 16)])
    corr = np.corrcoef(a.real, b.real)[0, 1]
    assert abs(corr) < 0.05
