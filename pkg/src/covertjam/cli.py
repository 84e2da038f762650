"""Command line front end: train a classifier, run a PNR sweep, report accuracy.

Scenario settings come from a flat key=value config file and/or flags; flags
win. Config keys (all optional): signal_type, snr_db, pnr_db (comma separated),
d_tr, d_te, d_cr, d_ce, d0, gamma, jammer, n_trials, seed, eps_acc_frac, genie,
paper_literal, scenario, and - for training - n_symbols, f_filters, hidden,
dropout, epochs, batch_size, learning_rate.
"""

import argparse
import sys

import numpy as np

from . import channel, harness, nnet


class CliError(Exception):
    pass


_BOOL_WORDS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}

# key -> converter for everything a config file may set
_CONVERTERS = {
    "signal_type": str, "snr_db": float, "jammer": str, "scenario": str,
    "d_tr": float, "d_te": float, "d_cr": float, "d_ce": float,
    "d0": float, "gamma": float,
    "n_trials": int, "seed": int, "eps_acc_frac": float,
    "pnr_db": lambda s: tuple(float(v) for v in s.split(",") if v.strip()),
    "genie": lambda s: _parse_bool(s), "paper_literal": lambda s: _parse_bool(s),
    "n_symbols": int, "f_filters": int, "hidden": int, "dropout": float,
    "epochs": int, "batch_size": int, "learning_rate": float,
}

_TRAIN_KEYS = ("n_symbols", "f_filters", "hidden", "dropout",
               "epochs", "batch_size", "learning_rate")

_TRAIN_DEFAULTS = {"n_symbols": 20000, "f_filters": 16, "hidden": 64, "dropout": 0.1,
                   "epochs": 50, "batch_size": 64, "learning_rate": 1e-3}


def _parse_bool(s: str) -> bool:
    try:
        return _BOOL_WORDS[s.strip().lower()]
    except KeyError:
        raise CliError(f"not a boolean: {s!r}") from None


def load_config(path) -> dict:
    """Flat `key = value` file, '#' comments, into typed settings."""
    settings = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected key = value")
                key, _, value = line.partition("=")
                key, value = key.strip(), value.strip()
                if key not in _CONVERTERS:
                    raise CliError(f"{path}:{lineno}: unknown config key {key!r}")
                try:
                    settings[key] = _CONVERTERS[key](value)
                except (ValueError, TypeError) as exc:
                    raise CliError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None
    return settings


def _apply_set_flags(settings: dict, pairs) -> None:
    for pair in pairs or []:
        if "=" not in pair:
            raise CliError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        if key not in _CONVERTERS:
            raise CliError(f"unknown settings key {key!r}")
        try:
            settings[key] = _CONVERTERS[key](value)
        except (ValueError, TypeError) as exc:
            raise CliError(f"bad value for {key}: {exc}") from None


def gather_settings(args) -> dict:
    settings = load_config(args.config) if args.config else {}
    _apply_set_flags(settings, getattr(args, "set", None))
    for key in ("signal_type", "snr_db", "jammer", "n_trials", "seed"):
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    return settings


def scenario_from_settings(settings: dict) -> harness.ScenarioConfig:
    topo = channel.Topology(
        d_tr=settings.get("d_tr", 1.0), d_te=settings.get("d_te", 1.0),
        d_cr=settings.get("d_cr", 1.0), d_ce=settings.get("d_ce", 1.0),
    )
    kwargs = {k: settings[k] for k in
              ("signal_type", "snr_db", "pnr_db", "d0", "gamma", "jammer",
               "n_trials", "seed", "eps_acc_frac", "genie", "paper_literal")
              if k in settings}
    if "scenario" in settings:
        kwargs["scenario_id"] = settings["scenario"]
    try:
        return harness.ScenarioConfig(topology=topo, **kwargs)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _train_model(settings: dict):
    opts = dict(_TRAIN_DEFAULTS)
    opts.update({k: settings[k] for k in _TRAIN_KEYS if k in settings})
    signal_type = settings.get("signal_type", "qpsk")
    snr_db = settings.get("snr_db", 3.0)
    seed = settings.get("seed", 0)
    topo = channel.Topology(d_te=settings.get("d_te", 1.0))
    rng = np.random.default_rng(seed)
    dataset = nnet.build_dataset(
        signal_type, snr_db, topo, opts["n_symbols"], rng,
        d0=settings.get("d0", 1.0), gamma=settings.get("gamma", 2.8),
    )
    model = nnet.init_model(opts["f_filters"], opts["hidden"], seed=seed,
                            dropout_rate=opts["dropout"])
    cfg = nnet.TrainConfig(epochs=opts["epochs"], batch_size=opts["batch_size"],
                           learning_rate=opts["learning_rate"], seed=seed)
    trained, trace = nnet.train(model, dataset, cfg)
    return trained, dataset, trace


def cmd_train(args) -> int:
    settings = gather_settings(args)
    trained, dataset, trace = _train_model(settings)
    nnet.save_model(trained, args.out)
    acc, _ = nnet.evaluate(trained, dataset, split="val")
    print(f"trained {settings.get('signal_type', 'qpsk')} classifier "
          f"at SNR {settings.get('snr_db', 3.0)} dB")
    print(f"final train loss {trace[-1]['train_loss']:.4f}, "
          f"validation accuracy {acc:.4f}")
    print(f"model written to {args.out}")
    return 0


def cmd_eval(args) -> int:
    settings = gather_settings(args)
    model = _load_model(args.model)
    rng = np.random.default_rng(settings.get("seed", 0) + 1)  # held-out draw
    topo = channel.Topology(d_te=settings.get("d_te", 1.0))
    dataset = nnet.build_dataset(
        settings.get("signal_type", "qpsk"), settings.get("snr_db", 3.0), topo,
        settings.get("n_symbols", 20000), rng,
        d0=settings.get("d0", 1.0), gamma=settings.get("gamma", 2.8),
    )
    acc, confusion = nnet.evaluate(model, dataset, split="all")
    print(f"accuracy {acc:.4f} over {dataset.x.shape[0]} blocks")
    for t in (nnet.SIGNAL, nnet.NOISE):
        total = confusion[t].sum()
        print(f"  true {nnet.LABEL_NAMES[t]}: "
              f"{confusion[t, t]}/{total} correct "
              f"({confusion[t, 1 - t]} mislabeled)")
    return 0


def cmd_attack_sweep(args) -> int:
    settings = gather_settings(args)
    cfg = scenario_from_settings(settings)
    model = _load_model(args.model)
    rows = harness.run_scenario(model, cfg)
    try:
        harness.emit_csv(rows, args.out)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}") from None
    for row in rows:
        print(f"pnr {row.pnr_db:+.1f} dB: covertness {row.covertness_rate:.3f}, "
              f"ber {row.ber:.4f}, mean epsilon {row.mean_epsilon:.4g}")
    print(f"{len(rows)} rows written to {args.out}")
    return 0


def _load_model(path):
    try:
        return nnet.load_model(path)
    except OSError as exc:
        raise CliError(f"cannot read model {path}: {exc}") from None
    except nnet.ModelFormatError as exc:
        raise CliError(f"bad model file {path}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covertjam",
        description="Covert-communication jamming simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model_required):
        p.add_argument("--config", help="flat key=value settings file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one settings key (repeatable)")
        p.add_argument("--signal-type", dest="signal_type", choices=harness.SIGNAL_TYPES)
        p.add_argument("--snr-db", dest="snr_db", type=float)
        p.add_argument("--seed", type=int)
        if model_required:
            p.add_argument("--model", required=True, help="classifier model file")

    p_train = sub.add_parser("train", help="build a dataset, train, save the model")
    common(p_train, model_required=False)
    p_train.add_argument("--out", required=True, help="output model path")
    p_train.set_defaults(func=cmd_train)

    p_sweep = sub.add_parser("attack-sweep", help="run a PNR sweep and write CSV")
    common(p_sweep, model_required=True)
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--jammer", choices=harness.JAMMER_KINDS)
    p_sweep.add_argument("--n-trials", dest="n_trials", type=int)
    p_sweep.set_defaults(func=cmd_attack_sweep)

    p_eval = sub.add_parser("eval", help="report classifier accuracy on a fresh dataset")
    common(p_eval, model_required=True)
    p_eval.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
