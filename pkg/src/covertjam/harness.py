"""Experiment driver: PNR sweeps over topologies and jammer types.

One trial transmits a fresh message (a 16-symbol block for QPSK/16QAM, one
OFDM frame for the 5G-like waveform), superposes the jammer's perturbation
through the four path-loss links, and records the eavesdropper's label per
16-sample block plus the receiver's bit error rate.

Power accounting: the per-sample noise variance realizes the configured SNR at
the eavesdropper, and each PNR point grants the jammer the transmit budget
p_max = pnr * noise_power * 16 per block. The adversarial jammer may spend
less than the budget (that is where the saturation in the curves comes from);
the Gaussian jammer spends it exactly in expectation.

Determinism: trial t at PNR index k draws everything from
default_rng([seed, k, t]) in the fixed order message bits, eavesdropper noise,
receiver noise, crafting noise (adversarial, non-genie), jam samples
(gaussian). Metrics for a trial therefore never depend on n_trials, and
identical configs give byte-identical CSVs.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import attack, channel, modem, nnet, waveform5g

JAMMER_KINDS = ("adversarial", "gaussian", "none")
SIGNAL_TYPES = (modem.QPSK, modem.QAM16, "ofdm")

CSV_HEADER = ("scenario,signal_type,snr_db,pnr_db,jammer,covertness_rate,"
              "ber,attack_success_rate,mean_epsilon,n_trials,seed")


@dataclass(frozen=True)
class ScenarioConfig:
    signal_type: str = modem.QPSK
    snr_db: float = 3.0
    pnr_db: tuple = (-20.0, -16.0, -12.0, -8.0, -4.0, 0.0)
    topology: channel.Topology = channel.Topology()
    d0: float = 1.0
    gamma: float = 2.8
    jammer: str = "adversarial"
    n_trials: int = 1000
    seed: int = 0
    eps_acc_frac: float = 1.0 / 32.0  # bisection accuracy as a fraction of sqrt(p_max)
    genie: bool = False               # craft on the true eavesdropper noise draw
    paper_literal: bool = False
    scenario_id: str = ""
    ofdm: waveform5g.OfdmConfig = waveform5g.OfdmConfig()

    def __post_init__(self):
        if self.signal_type not in SIGNAL_TYPES:
            raise ValueError(f"signal_type must be one of {SIGNAL_TYPES}")
        if self.jammer not in JAMMER_KINDS:
            raise ValueError(f"jammer must be one of {JAMMER_KINDS}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if len(self.pnr_db) == 0:
            raise ValueError("pnr_db list must be nonempty")
        if not 0 < self.eps_acc_frac < 1:
            raise ValueError("eps_acc_frac must lie in (0, 1)")

    @property
    def name(self) -> str:
        if self.scenario_id:
            return self.scenario_id
        return (f"{self.signal_type}-snr{_fmt(self.snr_db)}"
                f"-dce{_fmt(self.topology.d_ce)}-{self.jammer}")


@dataclass(frozen=True)
class MetricsRow:
    scenario: str
    signal_type: str
    snr_db: float
    pnr_db: float
    jammer: str
    covertness_rate: float
    ber: float
    attack_success_rate: float
    mean_epsilon: float
    n_trials: int
    seed: int


@dataclass
class TrialDraw:
    bits: np.ndarray       # transmitted bits for BER accounting
    x: np.ndarray          # transmitted complex samples
    n_te: np.ndarray       # eavesdropper noise
    n_tr: np.ndarray       # receiver noise
    craft_noise: np.ndarray | None
    jam: np.ndarray | None


@dataclass
class PointStats:
    """Raw per-block / per-trial outcomes behind one MetricsRow."""
    covert: np.ndarray        # bool per classified block
    bers: np.ndarray          # per trial
    epsilons: np.ndarray      # transmit amplitude per block
    successes: np.ndarray     # bool per block (adversarial), empty otherwise
    block_powers: np.ndarray  # ||delta||^2 per block, transmit space


def link_gains(cfg: ScenarioConfig) -> dict[str, float]:
    t = cfg.topology
    return {
        name: channel.path_gain(channel.LinkSpec(d, cfg.d0, cfg.gamma))
        for name, d in (("h_tr", t.d_tr), ("h_te", t.d_te), ("h_cr", t.d_cr), ("h_ce", t.d_ce))
    }


def derive_noise_power(cfg: ScenarioConfig) -> float:
    """Per-sample noise variance realizing snr_db at the eavesdropper input."""
    h_te = link_gains(cfg)["h_te"]
    p_rx = h_te * h_te * nnet.tx_sample_power(cfg.signal_type, cfg.ofdm)
    return channel.noise_power_for_snr(cfg.snr_db, p_rx)


def trial_rng(cfg: ScenarioConfig, pnr_idx: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, pnr_idx, trial])


def _trial_waveform(cfg: ScenarioConfig, rng) -> tuple[np.ndarray, np.ndarray]:
    if cfg.signal_type == "ofdm":
        payload = nnet.generate_payload(rng)
        frame = waveform5g.frame_tx(payload, cfg.ofdm)
        return waveform5g.crc_attach(payload).bits, frame
    scheme = modem.ModulationScheme(cfg.signal_type)
    bits = modem.generate_bits(nnet.BLOCK_LEN * scheme.bits_per_symbol, rng)
    return bits, modem.modulate(bits, scheme)


def draw_trial(cfg: ScenarioConfig, sigma2: float, p_max: float,
               pnr_idx: int, trial: int) -> TrialDraw:
    """All random material for one trial, in the documented draw order."""
    rng = trial_rng(cfg, pnr_idx, trial)
    bits, x = _trial_waveform(cfg, rng)
    n_te = channel.complex_noise(x.size, sigma2, rng)
    n_tr = channel.complex_noise(x.size, sigma2, rng)
    craft_noise = None
    if cfg.jammer == "adversarial" and not cfg.genie:
        craft_noise = channel.complex_noise(x.size, sigma2, rng)
    jam = None
    if cfg.jammer == "gaussian":
        n_blocks = x.size // nnet.BLOCK_LEN
        jam = np.concatenate([attack.gaussian_jam(p_max, rng) for _ in range(n_blocks)])
    return TrialDraw(bits, x, n_te, n_tr, craft_noise, jam)


def covertness_rate(model: nnet.ClassifierModel, blocks: np.ndarray) -> float:
    """Fraction of perturbed signal-bearing blocks the classifier labels noise."""
    blocks = np.asarray(blocks, dtype=np.float64)
    if blocks.ndim == 2:
        blocks = blocks[None]
    if blocks.shape[0] == 0:
        raise ValueError("covertness_rate needs a nonempty block set")
    return float(np.mean(nnet.predict(model, blocks) == nnet.NOISE))


def _segment(samples: np.ndarray) -> np.ndarray:
    """(n_trials, L) complex -> (n_trials * L/16, 2, 16) real classifier blocks."""
    n, length = samples.shape
    blocks = samples.reshape(n * (length // nnet.BLOCK_LEN), nnet.BLOCK_LEN)
    return nnet.iq_from_complex(blocks)


def simulate_point(model: nnet.ClassifierModel, cfg: ScenarioConfig,
                   pnr_idx: int) -> PointStats:
    """Run every trial at one PNR grid point and collect raw outcomes."""
    sigma2 = derive_noise_power(cfg)
    p_max = channel.ratio_from_db(cfg.pnr_db[pnr_idx]) * sigma2 * nnet.BLOCK_LEN
    g = link_gains(cfg)

    draws = [draw_trial(cfg, sigma2, p_max, pnr_idx, t) for t in range(cfg.n_trials)]
    x = np.stack([d.x for d in draws])
    n_te = np.stack([d.n_te for d in draws])
    n_tr = np.stack([d.n_tr for d in draws])
    n_trials, length = x.shape
    blocks_per_trial = length // nnet.BLOCK_LEN

    if cfg.jammer == "adversarial":
        craft_base = n_te if cfg.genie else np.stack([d.craft_noise for d in draws])
        craft_input = _segment(g["h_te"] * x + craft_base)
        acfg = attack.AttackConfig(
            p_max=p_max, eps_acc=np.sqrt(p_max) * cfg.eps_acc_frac,
            h_ce=g["h_ce"], paper_literal=cfg.paper_literal,
        )
        results = attack.craft_perturbation_batch(model, craft_input, acfg)
        delta_blocks = np.stack([r.delta for r in results])
        delta = delta_blocks.reshape(n_trials, length)
        epsilons = np.array([r.epsilon for r in results])
        successes = np.array([r.success for r in results])
    elif cfg.jammer == "gaussian":
        delta = np.stack([d.jam for d in draws])
        delta_blocks = delta.reshape(n_trials * blocks_per_trial, nnet.BLOCK_LEN)
        epsilons = np.linalg.norm(delta_blocks, axis=1)
        successes = np.array([], dtype=bool)
    else:
        delta = np.zeros_like(x)
        delta_blocks = delta.reshape(n_trials * blocks_per_trial, nnet.BLOCK_LEN)
        epsilons = np.zeros(n_trials * blocks_per_trial)
        successes = np.array([], dtype=bool)

    eve_blocks = _segment(g["h_te"] * x + g["h_ce"] * delta + n_te)
    covert = nnet.predict(model, eve_blocks) == nnet.NOISE

    r_rx = (g["h_tr"] * x + g["h_cr"] * delta + n_tr) / g["h_tr"]
    bers = np.empty(n_trials)
    for t in range(n_trials):
        if cfg.signal_type == "ofdm":
            syms = waveform5g.ofdm_demodulate(r_rx[t], cfg.ofdm, 1.0)
            decoded = modem.demodulate(syms, modem.ModulationScheme(modem.QPSK))
        else:
            decoded = modem.demodulate(r_rx[t], modem.ModulationScheme(cfg.signal_type))
        bers[t] = modem.ber(draws[t].bits, decoded)

    return PointStats(
        covert=covert, bers=bers, epsilons=epsilons, successes=successes,
        block_powers=(np.abs(delta_blocks) ** 2).sum(axis=1),
    )


def run_scenario(model: nnet.ClassifierModel, cfg: ScenarioConfig) -> list[MetricsRow]:
    rows = []
    for k, pnr in enumerate(cfg.pnr_db):
        stats = simulate_point(model, cfg, k)
        rows.append(MetricsRow(
            scenario=cfg.name,
            signal_type=cfg.signal_type,
            snr_db=cfg.snr_db,
            pnr_db=float(pnr),
            jammer=cfg.jammer,
            covertness_rate=float(np.mean(stats.covert)),
            ber=float(np.mean(stats.bers)),
            attack_success_rate=(float(np.mean(stats.successes))
                                 if stats.successes.size else 0.0),
            mean_epsilon=float(np.mean(stats.epsilons)),
            n_trials=cfg.n_trials,
            seed=cfg.seed,
        ))
    return rows


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if f.is_integer():
        return str(int(f))
    return repr(f)


def emit_csv(rows: list[MetricsRow], path) -> None:
    """Write rows under the documented header; full precision, deterministic bytes."""
    lines = [CSV_HEADER]
    for r in rows:
        fields = [r.scenario, r.signal_type, _fmt(r.snr_db), _fmt(r.pnr_db), r.jammer,
                  _fmt(r.covertness_rate), _fmt(r.ber), _fmt(r.attack_success_rate),
                  _fmt(r.mean_epsilon), _fmt(r.n_trials), _fmt(r.seed)]
        for f in fields[:2] + [fields[4]]:
            if "," in f or "\n" in f:
                raise ValueError(f"field {f!r} would corrupt the CSV")
        lines.append(",".join(fields))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> list[MetricsRow]:
    """Parse a file written by emit_csv back into rows."""
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != 11:
                raise ValueError(f"malformed CSV line: {line!r}")
            rows.append(MetricsRow(
                scenario=parts[0], signal_type=parts[1], snr_db=float(parts[2]),
                pnr_db=float(parts[3]), jammer=parts[4], covertness_rate=float(parts[5]),
                ber=float(parts[6]), attack_success_rate=float(parts[7]),
                mean_epsilon=float(parts[8]), n_trials=int(parts[9]), seed=int(parts[10]),
            ))
    return rows


def config_overrides(cfg: ScenarioConfig, **updates) -> ScenarioConfig:
    """New ScenarioConfig with the given fields replaced."""
    return dataclasses.replace(cfg, **updates)
