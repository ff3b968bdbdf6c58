"""Experiment configuration, orchestration and persistence."""

from __future__ import annotations

import copy
import csv
import json
import os
from pathlib import Path
import warnings

import numpy as np

from . import oracle
from .actor import ActorConfig, default_beta, ipg_exact, localized_actor_critic
from .congestion import ne_gap_congestion
from .critic import CriticConfig, make_features
from .game import CongestionGame, game_from_spec
from .policy import params_from_json, softmax_profile
from .regret import RegretSeries
from .seeding import substream

OUTPUT_ENV = "NETMPG_OUTPUT_ROOT"
CSV_COLUMNS = ("m", "agent", "ne_gap", "j_i", "avg_regret_prefix", "nash_regret_prefix")

# key -> accepted types; nested sections have their own tables
_SCHEMA = {
    "game": dict,
    "algorithm": str,
    "actor": dict,
    "critic": dict,
    "features": str,
    "evaluation": dict,
    "init": str,
    "init_scale": (int, float),
    "rescale_rewards": bool,
    "seeds": list,
    "output_dir": (str, type(None)),
}
_ACTOR_KEYS = {"M": int, "T": int, "H": int, "beta": (int, float, type(None)), "beta_mode": str,
               "kappa_G": int, "snapshot_every": int, "critic_warm_start": bool}
_CRITIC_KEYS = {"K": int, "alpha": (int, float), "lambda": (int, float), "eps": (int, float), "kappa_c": int}
_EVAL_KEYS = {"stride": int, "restarts": int, "steps": int, "method": str}

DEFAULTS = {
    "algorithm": "lac",
    "actor": {"M": 4000, "T": 1, "H": 15, "beta": 1e-3, "beta_mode": "literal", "kappa_G": 1,
              "snapshot_every": 100, "critic_warm_start": False},
    "critic": {"K": 10, "alpha": 1e-3, "lambda": 0.0, "eps": 0.0, "kappa_c": 1},
    "features": "onehot-concat",
    "evaluation": {"stride": 40, "restarts": 3, "steps": 200, "method": "local"},
    "init": "zeros",
    "init_scale": 1.0,
    "rescale_rewards": False,
    "seeds": [0],
    "output_dir": None,
}


class ConfigError(ValueError):
    pass


def _check_keys(section, data, schema):
    for key, value in data.items():
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in {section}")
        expected = schema[key]
        if isinstance(value, bool) and expected in (int, (int, float)):
            raise ConfigError(f"{section}.{key} must be numeric, got a boolean")
        if not isinstance(value, expected):
            raise ConfigError(f"{section}.{key} has the wrong type ({type(value).__name__})")


def validate_config(raw):
    """Merge ``raw`` over the defaults and validate it; unknown keys are rejected."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys("config", raw, _SCHEMA)
    if "game" not in raw:
        raise ConfigError("config needs a 'game' entry")
    cfg = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if isinstance(value, dict) and key in ("actor", "critic", "evaluation"):
            cfg[key].update(value)
        else:
            cfg[key] = copy.deepcopy(value)
    _check_keys("actor", cfg["actor"], _ACTOR_KEYS)
    _check_keys("critic", cfg["critic"], _CRITIC_KEYS)
    _check_keys("evaluation", cfg["evaluation"], _EVAL_KEYS)
    if cfg["algorithm"] not in ("ipg", "lac"):
        raise ConfigError("algorithm must be 'ipg' or 'lac'")
    if cfg["features"] not in ("tabular", "onehot-concat"):
        raise ConfigError("features must be 'tabular' or 'onehot-concat'")
    if cfg["actor"]["beta_mode"] not in ("literal", "paper-exact", "paper-approx"):
        raise ConfigError("beta_mode must be literal, paper-exact or paper-approx")
    if cfg["evaluation"]["method"] not in ("local", "upper"):
        raise ConfigError("evaluation.method must be 'local' or 'upper'")
    if cfg["init"] not in ("zeros", "normal"):
        raise ConfigError("init must be 'zeros' or 'normal'")
    if cfg["evaluation"]["stride"] < 1:
        raise ConfigError("evaluation.stride must be positive")
    if not all(isinstance(s, int) and not isinstance(s, bool) for s in cfg["seeds"]):
        raise ConfigError("seeds must be integers")
    try:
        game_from_spec(cfg["game"])
        _actor_config(cfg, None)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _beta(cfg, game):
    a = cfg["actor"]
    if a["beta_mode"] == "paper-exact":
        return default_beta(game, a["kappa_G"], "exact")
    if a["beta_mode"] == "paper-approx":
        return default_beta(game, a["kappa_G"], "approx")
    if a["beta"] is None:
        raise ConfigError("literal beta_mode needs actor.beta")
    return float(a["beta"])


def _actor_config(cfg, game):
    a, c = cfg["actor"], cfg["critic"]
    critic = CriticConfig(K=c["K"], alpha=float(c["alpha"]), lam=float(c["lambda"]), eps=float(c["eps"]),
                          kappa_c=c["kappa_c"])
    beta = _beta(cfg, game) if game is not None else (a["beta"] or 1.0)
    return ActorConfig(M=a["M"], T=a["T"], H=a["H"], beta=beta, kappa_G=a["kappa_G"], critic=critic,
                       snapshot_every=a["snapshot_every"], critic_warm_start=a["critic_warm_start"])


def initial_params(game, cfg, seed):
    if cfg["init"] == "zeros":
        return [np.zeros((game.n_states[i], game.n_actions[i])) for i in range(game.n)]
    rng = substream(seed, "init")
    return [cfg["init_scale"] * rng.standard_normal((game.n_states[i], game.n_actions[i]))
            for i in range(game.n)]


def evaluate_gaps(game, theta, evaluation, rng, rescale=False):
    """Per-agent NE-gap report; side-effect free (works on a copy of ``theta``)."""
    profile = softmax_profile([np.array(t, copy=True) for t in theta])
    if isinstance(game, CongestionGame):
        return ne_gap_congestion(game, profile, evaluation["restarts"], evaluation["steps"], rng,
                                 method=evaluation["method"])
    return oracle.ne_gap_report(game, profile, evaluation["method"], evaluation["restarts"],
                                evaluation["steps"], rng, rescale)


def _fmt(x):
    return format(float(x), ".17g")


def write_regret_csv(path, steps, reports):
    gaps = np.array([r.gaps for r in reports])
    series = RegretSeries(gaps, np.asarray(steps))
    agent_prefix = series.agent_prefix()
    nash = series.nash_prefix()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for k, m in enumerate(steps):
            for i in range(gaps.shape[1]):
                w.writerow([int(m), i, _fmt(gaps[k, i]), _fmt(reports[k].J[i]),
                            _fmt(agent_prefix[k, i]), _fmt(nash[k])])
    return series


def read_regret_csv(path):
    """Return ``(steps, gaps)`` from a regret CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    steps = sorted({int(r["m"]) for r in rows})
    n = max(int(r["agent"]) for r in rows) + 1
    gaps = np.zeros((len(steps), n))
    pos = {m: k for k, m in enumerate(steps)}
    for r in rows:
        gaps[pos[int(r["m"])], int(r["agent"])] = float(r["ne_gap"])
    return np.array(steps), gaps


def checkpoint_payload(game_spec, m, theta):
    return {"game": game_spec, "m": int(m), "theta": {str(i): np.asarray(t).tolist() for i, t in enumerate(theta)}}


def load_checkpoint(path):
    data = json.loads(Path(path).read_text())
    game = game_from_spec(data["game"])
    theta = params_from_json(json.dumps(data["theta"]))
    return game, data["m"], theta


def run_experiment(config, seed, out_dir=None):
    """Run one seed of a validated (or raw) config and write its artifacts.

    Files: ``regret.csv``, ``metadata.json`` and ``checkpoints/theta_<m>.json``.
    Returns the run directory.
    """
    cfg = validate_config(config)
    game = game_from_spec(cfg["game"])
    root = Path(out_dir or cfg.get("output_dir") or os.environ.get(OUTPUT_ENV, "runs"))
    run_dir = root / f"seed_{seed}"
    (run_dir / "checkpoints").mkdir(parents=True, exist_ok=True)
    acfg = _actor_config(cfg, game)
    evaluation = cfg["evaluation"]
    eval_rng = substream(seed, "best-response")
    steps, reports = [], []

    def on_iterate(m, theta):
        last = acfg.M
        if m % evaluation["stride"] == 0 or m == last:
            steps.append(m)
            reports.append(evaluate_gaps(game, theta, evaluation, eval_rng, cfg["rescale_rewards"]))

    theta0 = initial_params(game, cfg, seed)
    error = None
    log = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        try:
            if cfg["algorithm"] == "ipg":
                theta, log = ipg_exact(game, theta0, acfg.beta, acfg.M, callback=on_iterate,
                                       snapshot_every=acfg.snapshot_every, rescale=cfg["rescale_rewards"])
            else:
                features = [make_features(game, i, acfg.critic.kappa_c, cfg["features"]) for i in range(game.n)]
                theta, log = localized_actor_critic(game, acfg, features, substream(seed, "critic"),
                                                    substream(seed, "actor"), theta0=theta0, callback=on_iterate)
        except FloatingPointError as exc:
            error = str(exc)
    series = write_regret_csv(run_dir / "regret.csv", steps, reports) if steps else None
    if log is not None:
        for m, th in sorted(log.snapshots.items()):
            (run_dir / "checkpoints" / f"theta_{m}.json").write_text(
                json.dumps(checkpoint_payload(cfg["game"], m, th)))
    meta = {
        "seed": seed,
        "config": cfg,
        "beta": acfg.beta,
        "eval_stride": evaluation["stride"],
        "evaluated_steps": [int(m) for m in steps],
        "rng_streams": ["init", "critic", "actor", "best-response"],
        "error": error,
        "final_global_gap": None if series is None else float(series.gaps[-1].max()),
        "final_nash_regret": None if series is None else float(series.nash_prefix()[-1]),
        "final_avg_nash_regret": None if series is None else float(series.avg_prefix()[-1]),
    }
    (run_dir / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return run_dir


def run_batch(config, seeds=None, out_dir=None):
    """Run every seed and write ``plotdata.csv`` with mean/std of both regret curves."""
    cfg = validate_config(config)
    seeds = cfg["seeds"] if seeds is None else list(seeds)
    root = Path(out_dir or cfg.get("output_dir") or os.environ.get(OUTPUT_ENV, "runs"))
    dirs = [run_experiment(cfg, s, root) for s in seeds]
    write_plotdata(root / "plotdata.csv", dirs)
    return root, dirs


def write_plotdata(path, run_dirs):
    curves = []
    steps = None
    for d in sorted(run_dirs, key=str):
        st, gaps = read_regret_csv(Path(d) / "regret.csv")
        s = RegretSeries(gaps, st)
        curves.append((s.nash_prefix(), s.avg_prefix()))
        steps = st if steps is None or len(st) < len(steps) else steps
    L = len(steps)
    nr = np.array([c[0][:L] for c in curves])
    anr = np.array([c[1][:L] for c in curves])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("m", "nash_regret_mean", "nash_regret_std", "avg_nash_regret_mean", "avg_nash_regret_std"))
        for k in range(L):
            w.writerow([int(steps[k]), _fmt(nr[:, k].mean()), _fmt(nr[:, k].std()),
                        _fmt(anr[:, k].mean()), _fmt(anr[:, k].std())])
