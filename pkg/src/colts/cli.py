"""Experiment runner: parses a flat key-value config, dispatches the named
experiments, and writes deterministic CSV outputs.

Usage: ``colts <command> --config <path> [--seeds a,b,c] [--out dir] [--threads n]``

Commands: run, rates, sweep_gamma, sweep_m, resampling_table, hard_compare,
decoupled_study.  Exit codes: 0 success, 2 configuration error, 3 runtime or
numerical error.

CSV schemas (fixed headers, rows in deterministic order; identical configs
byte-reproduce identical files when timing capture is off):

* summary:    seed,algo,instance,T,R_T,S_T,wall_ns_total,wall_ns_per_round,
              rate_local,rate_global,rate_unsat
* rounds:     seed,t,cum_regret,cum_risk,flags
              (flags is the event bitmask: bit0 consistent, bit1 local
              optimism, bit2 global optimism, bit3 unsaturated, bit4
              perturbed-program feasible; empty when instrumentation is off)
* sweep_gamma: gamma,rate_local,rate_global,rate_unsat,mean,std
              (mean/std are terminal regret across seeds)
* sweep_m:    m,regret_scolts,regret_safelts,regret_ratio,wall_scolts_ns,
              wall_safelts_ns,time_ratio (ratios are safelts/scolts)
* resampling: samples,regret_mean,regret_std,risk_mean,risk_std
* decoupled:  design,m,rate_local,rate_global,rate_unsat,regret_mean,risk_mean
"""

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .instance import builtin_instance, load_instance
from .sim import AlgoConfig, run_batch

SUMMARY_HEADER = ("seed,algo,instance,T,R_T,S_T,wall_ns_total,wall_ns_per_round,"
                  "rate_local,rate_global,rate_unsat")
ROUNDS_HEADER = "seed,t,cum_regret,cum_risk,flags"
SWEEP_GAMMA_HEADER = "gamma,rate_local,rate_global,rate_unsat,mean,std"
SWEEP_M_HEADER = ("m,regret_scolts,regret_safelts,regret_ratio,"
                  "wall_scolts_ns,wall_safelts_ns,time_ratio")
RESAMPLING_HEADER = "samples,regret_mean,regret_std,risk_mean,risk_std"
DECOUPLED_HEADER = "design,m,rate_local,rate_global,rate_unsat,regret_mean,risk_mean"

COMMANDS = ("run", "rates", "sweep_gamma", "sweep_m", "resampling_table",
            "hard_compare", "decoupled_study")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    instance_name: str = "box9"
    instance_seed: int = 0
    instance_m: int = 12
    instance_file: str | None = None
    algo: AlgoConfig = field(default_factory=lambda: AlgoConfig(algorithm="rcolts",
                                                                r=0, samples=1))
    T: int = 1000
    seeds: tuple = (1, 2, 3)
    out: str = "out"
    thin: int = 0
    instrument: bool = False
    threads: int = 1
    record_timing: bool = True
    gamma_lo: float | None = None
    gamma_hi: float | None = None
    gamma_points: int = 41
    m_list: tuple = (1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)

    def build_instance(self, m_override=None):
        if self.instance_file:
            return load_instance(self.instance_file)
        sigma = self.algo.sigma if self.algo.sigma is not None else 1.0
        return builtin_instance(self.instance_name, seed=self.instance_seed,
                                m=m_override if m_override is not None else self.instance_m,
                                obs_sigma=sigma)


def _get(parser, section, key, conv, default):
    if parser.has_option(section, key):
        raw = parser.get(section, key)
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
    return default


def _bool(raw):
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _int_list(raw):
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def parse_config(path):
    """Read the flat sectioned key-value config file into an ExperimentConfig."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file {path!r} not found")
    cfg = ExperimentConfig()
    cfg.instance_name = _get(parser, "instance", "name", str, cfg.instance_name)
    cfg.instance_seed = _get(parser, "instance", "seed", int, cfg.instance_seed)
    cfg.instance_m = _get(parser, "instance", "m", int, cfg.instance_m)
    cfg.instance_file = _get(parser, "instance", "file", str, None)

    algo = dict(
        algorithm=_get(parser, "algorithm", "name", str, "rcolts"),
        delta=_get(parser, "algorithm", "delta", float, 0.1),
        gamma=_get(parser, "algorithm", "gamma", float, 0.5),
        design=_get(parser, "algorithm", "design", str, "coupled"),
        base=_get(parser, "algorithm", "base", str, "sphere"),
        r=_get(parser, "algorithm", "r", int, 0),
        preset=_get(parser, "algorithm", "preset", str, None) or None,
    )
    samples = _get(parser, "algorithm", "samples", int, None)
    algo["samples"] = samples
    sigma = _get(parser, "algorithm", "sigma", float, None)
    algo["sigma"] = sigma
    gamma0_raw = _get(parser, "algorithm", "gamma0", str, "estimate")
    if gamma0_raw in ("estimate", "true"):
        algo["gamma0"] = gamma0_raw
    else:
        try:
            algo["gamma0"] = float(gamma0_raw)
        except ValueError as exc:
            raise ConfigError(f"[algorithm] gamma0 = {gamma0_raw!r}") from exc
    cfg.algo = AlgoConfig(**algo)

    cfg.T = _get(parser, "run", "T", int, cfg.T)
    cfg.seeds = _get(parser, "run", "seeds", _int_list, cfg.seeds)
    cfg.out = _get(parser, "run", "out", str, cfg.out)
    cfg.thin = _get(parser, "run", "thin", int, cfg.thin)
    cfg.instrument = _get(parser, "run", "instrument", _bool, cfg.instrument)
    cfg.threads = _get(parser, "run", "threads", int, cfg.threads)
    cfg.record_timing = _get(parser, "run", "record_timing", _bool, cfg.record_timing)

    cfg.gamma_lo = _get(parser, "sweep", "gamma_lo", float, None)
    cfg.gamma_hi = _get(parser, "sweep", "gamma_hi", float, None)
    cfg.gamma_points = _get(parser, "sweep", "gamma_points", int, cfg.gamma_points)
    cfg.m_list = _get(parser, "sweep", "m_list", _int_list, cfg.m_list)

    if not 0.0 < cfg.algo.delta < 1.0:
        raise ConfigError("delta must lie in (0, 1)")
    if cfg.T < 1:
        raise ConfigError("T must be >= 1")
    if len(set(cfg.seeds)) != len(cfg.seeds) or not cfg.seeds:
        raise ConfigError("seeds must be a nonempty list of distinct integers")
    if cfg.instance_name not in ("box9", "polygon") and not cfg.instance_file:
        raise ConfigError(f"unknown builtin instance {cfg.instance_name!r}")
    return cfg


def _f(x):
    return repr(float(x))


def _summary_rows(summaries, record_timing):
    rows = []
    for s in summaries:
        wall_total = s.wall_ns_total if record_timing else 0
        wall_round = s.wall_ns_per_round if record_timing else 0.0
        rates = ["" if s.rate_local is None else _f(s.rate_local),
                 "" if s.rate_global is None else _f(s.rate_global),
                 "" if s.rate_unsat is None else _f(s.rate_unsat)]
        rows.append(",".join([str(s.seed), s.algorithm, s.instance, str(s.T),
                              _f(s.regret), _f(s.risk), str(wall_total),
                              _f(wall_round)] + rates))
    return rows


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _rounds_rows(results):
    rows = []
    for summary, records in results:
        for rec in records:
            flag = "" if rec.flags is None else str(rec.flags.bits())
            rows.append(",".join([str(summary.seed), str(rec.t), _f(rec.cum_regret),
                                  _f(rec.cum_risk), flag]))
    return rows


def _mean_std(values):
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std())


def cmd_run(cfg, csv_name="summary.csv"):
    inst = cfg.build_instance()
    results = run_batch(inst, cfg.algo, cfg.T, cfg.seeds, record_every=cfg.thin,
                        instrument=cfg.instrument, n_jobs=cfg.threads,
                        with_records=True)
    summaries = [s for s, _ in results]
    _write_csv(os.path.join(cfg.out, csv_name), SUMMARY_HEADER,
               _summary_rows(summaries, cfg.record_timing))
    if cfg.thin:
        _write_csv(os.path.join(cfg.out, "rounds.csv"), ROUNDS_HEADER,
                   _rounds_rows(results))
    rm, rs = _mean_std([s.regret for s in summaries])
    km, ks = _mean_std([s.risk for s in summaries])
    print(f"regret {rm:.4f} +- {rs:.4f}   risk {km:.4f} +- {ks:.4f}")
    if cfg.instrument:
        print("rates: local {:.4f} global {:.4f} unsat {:.4f}".format(
            float(np.mean([s.rate_local for s in summaries])),
            float(np.mean([s.rate_global for s in summaries])),
            float(np.mean([s.rate_unsat for s in summaries]))))
    return 0


def cmd_rates(cfg):
    cfg.instrument = True
    return cmd_run(cfg, csv_name="rates_summary.csv")


def default_gamma_grid(d, lo=None, hi=None, points=41):
    """Exponential grid, endpoints inclusive: default [(3d)^(-3/2), sqrt(3d)]."""
    root = math.sqrt(3.0 * d)
    lo = root ** -3 if lo is None else lo
    hi = root if hi is None else hi
    if points < 2 or lo <= 0 or hi <= lo:
        raise ConfigError("gamma grid needs points >= 2 and 0 < lo < hi")
    return np.geomspace(lo, hi, points)


def cmd_sweep_gamma(cfg):
    inst = cfg.build_instance()
    grid = default_gamma_grid(inst.d, cfg.gamma_lo, cfg.gamma_hi, cfg.gamma_points)
    rows = []
    for gamma in grid:
        algo = replace(cfg.algo, gamma=float(gamma))
        summaries = run_batch(inst, algo, cfg.T, cfg.seeds, instrument=True,
                              n_jobs=cfg.threads)
        mean, std = _mean_std([s.regret for s in summaries])
        rows.append(",".join([_f(gamma),
                              _f(np.mean([s.rate_local for s in summaries])),
                              _f(np.mean([s.rate_global for s in summaries])),
                              _f(np.mean([s.rate_unsat for s in summaries])),
                              _f(mean), _f(std)]))
        print(f"gamma={gamma:.5g} done")
    _write_csv(os.path.join(cfg.out, "sweep_gamma.csv"), SWEEP_GAMMA_HEADER, rows)
    return 0


def cmd_resampling_table(cfg):
    inst = cfg.build_instance()
    rows = []
    means = []
    for samples in (1, 2, 3):
        algo = replace(cfg.algo, algorithm="rcolts", samples=samples)
        summaries = run_batch(inst, algo, cfg.T, cfg.seeds, n_jobs=cfg.threads)
        rm, rs = _mean_std([s.regret for s in summaries])
        km, ks = _mean_std([s.risk for s in summaries])
        means.append(rm)
        rows.append(",".join([str(samples), _f(rm), _f(rs), _f(km), _f(ks)]))
        print(f"samples={samples}: regret {rm:.2f} +- {rs:.2f}, risk {km:.2f} +- {ks:.2f}")
    _write_csv(os.path.join(cfg.out, "resampling.csv"), RESAMPLING_HEADER, rows)
    decreasing = means[0] > means[1] > means[2]
    print(f"regret decreasing in samples: {'yes' if decreasing else 'NO'}")
    return 0


def _timed_pair(cfg, inst, record_every=0):
    """Run the scaling agent and the cone baseline on the same seeds."""
    scolts = replace(cfg.algo, algorithm="scolts", gamma0="true")
    safelts = replace(cfg.algo, algorithm="safelts")
    res_s = run_batch(inst, scolts, cfg.T, cfg.seeds, record_every=record_every,
                      n_jobs=cfg.threads, with_records=True)
    res_l = run_batch(inst, safelts, cfg.T, cfg.seeds, record_every=record_every,
                      n_jobs=cfg.threads, with_records=True)
    return res_s, res_l


def cmd_hard_compare(cfg):
    inst = cfg.build_instance()
    record_every = cfg.thin if cfg.thin else max(1, cfg.T // 200)
    res_s, res_l = _timed_pair(cfg, inst, record_every=record_every)
    summaries = [s for s, _ in res_s] + [s for s, _ in res_l]
    _write_csv(os.path.join(cfg.out, "hard_compare_summary.csv"), SUMMARY_HEADER,
               _summary_rows(summaries, cfg.record_timing))
    _write_csv(os.path.join(cfg.out, "hard_compare_rounds.csv"), ROUNDS_HEADER,
               _rounds_rows(res_s + res_l))
    t_s = np.mean([s.wall_ns_per_round for s, _ in res_s])
    t_l = np.mean([s.wall_ns_per_round for s, _ in res_l])
    r_s = np.mean([s.regret for s, _ in res_s])
    r_l = np.mean([s.regret for s, _ in res_l])
    print(f"per-round time ratio (cone baseline / scaling): {t_l / t_s:.2f}")
    print(f"terminal regret: scaling {r_s:.2f}, cone baseline {r_l:.2f}")
    return 0


def cmd_sweep_m(cfg):
    rows = []
    for m in cfg.m_list:
        inst = cfg.build_instance(m_override=m)
        res_s, res_l = _timed_pair(replace_instance(cfg, "polygon"), inst)
        r_s = np.mean([s.regret for s, _ in res_s])
        r_l = np.mean([s.regret for s, _ in res_l])
        t_s = np.mean([s.wall_ns_per_round for s, _ in res_s])
        t_l = np.mean([s.wall_ns_per_round for s, _ in res_l])
        ratio_r = r_l / r_s if r_s > 0 else math.inf
        rows.append(",".join([str(m), _f(r_s), _f(r_l), _f(ratio_r),
                              _f(t_s if cfg.record_timing else 0.0),
                              _f(t_l if cfg.record_timing else 0.0),
                              _f(t_l / t_s)]))
        print(f"m={m}: regret ratio {ratio_r:.2f}, time ratio {t_l / t_s:.2f}")
    _write_csv(os.path.join(cfg.out, "sweep_m.csv"), SWEEP_M_HEADER, rows)
    return 0


def replace_instance(cfg, name):
    if cfg.instance_name != name:
        raise ConfigError(f"this command requires the {name!r} instance family")
    return cfg


def cmd_decoupled_study(cfg):
    rows = []
    rates = {}
    m_values = cfg.m_list if cfg.m_list else (10, 100)
    for design in ("coupled", "decoupled"):
        for m in m_values:
            inst = cfg.build_instance(m_override=m)
            algo = replace(cfg.algo, design=design)
            summaries = run_batch(inst, algo, cfg.T, cfg.seeds, instrument=True,
                                  n_jobs=cfg.threads)
            loc = float(np.mean([s.rate_local for s in summaries]))
            glo = float(np.mean([s.rate_global for s in summaries]))
            uns = float(np.mean([s.rate_unsat for s in summaries]))
            rm, _ = _mean_std([s.regret for s in summaries])
            km, _ = _mean_std([s.risk for s in summaries])
            rates[(design, m)] = loc
            rows.append(",".join([design, str(m), _f(loc), _f(glo), _f(uns),
                                  _f(rm), _f(km)]))
            print(f"{design} m={m}: local {loc:.3f} global {glo:.3f} unsat {uns:.3f}")
    _write_csv(os.path.join(cfg.out, "decoupled.csv"), DECOUPLED_HEADER, rows)
    m_hi = max(m_values)
    if ("decoupled", m_hi) in rates and ("coupled", m_hi) in rates:
        below = rates[("decoupled", m_hi)] < rates[("coupled", m_hi)]
        print(f"decoupled local rate below coupled at m={m_hi}: "
              f"{'yes' if below else 'NO'}")
    return 0


_DISPATCH = {
    "run": cmd_run,
    "rates": cmd_rates,
    "sweep_gamma": cmd_sweep_gamma,
    "sweep_m": cmd_sweep_m,
    "resampling_table": cmd_resampling_table,
    "hard_compare": cmd_hard_compare,
    "decoupled_study": cmd_decoupled_study,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="colts",
                                     description="safe linear bandit experiment runner")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--seeds", default=None,
                        help="comma-separated seed list overriding the config")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.seeds is not None:
            cfg.seeds = _int_list(args.seeds)
        if args.out is not None:
            cfg.out = args.out
        if args.threads is not None:
            cfg.threads = args.threads
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        return _DISPATCH[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime/numerical failures exit 3
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
