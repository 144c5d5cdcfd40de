"""Command-line experiment runner.

    barelay analyze  --scheme fixed-optimal --ps 0.5 --pr 0.5 --s0 2 --r0 2
    barelay simulate --scheme mixed-pa --s0 2 --omega-s 10 --gamma-budget-db 10
    barelay sweep    --scheme fixed-optimal --s0 2 --r0 2 --axis gamma_db --values 0:40:5
    barelay reproduce fig2 --out fig2.csv

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 unachievable delay target.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .benchmarks import conv1_fixed, conv1_mixed, conv1_mixed_pa, conv2_fixed, conv_mixed_delay, conv_mixed_high_snr
from .channel import ChannelParams, OutageProfile, RateConfig, db_to_linear, outage_probs
from .errors import ConfigError, RelayError, SolverError, UnachievableDelayError
from .fixed_rate import markov_metrics, outage_optimal, throughput_optimal, tune_delay
from .mixed_rate import mixed_policy
from .sim_engine import (
    DEFAULT_SLOTS,
    SCHEMES,
    SWEEP_AXES,
    TRANSIENT_MODES,
    RunConfig,
    analyze,
    best_kn_schedule,
    simulate,
    sweep,
    tune_qmax,
)

MODES = ("analyze", "simulate", "sweep", "reproduce")
FIGURES = ("fig2a", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7")
FORMATS = ("csv", "json")
CSV_COLUMNS = (
    "gamma_db", "scheme", "ps", "pr", "pc", "case",
    "throughput_analytic", "throughput_sim", "outage_analytic", "outage_sim",
    "delay_analytic", "delay_sim", "seed", "n_slots",
)  # fmt: skip
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_DELAY = 0, 2, 3, 4

_FIXED_SCHEMES = {"fixed-optimal", "fixed-delay-v1", "fixed-delay-v2", "fixed-delay-v3", "conv1-fixed", "conv2-fixed"}
_MIXED_SCHEMES = {"mixed", "mixed-pa", "mixed-delay", "conv1-mixed", "conv-mixed-kn"}
_GAMMA_AXES = {"gamma_db", "gamma_budget_db"}

FIGURE_GAMMAS = {
    "fig2a": "0:40:2",
    "fig2": "0:40:2",
    "fig3": "0:45:2.5",
    "fig4": "0:45:2.5",
    "fig5": "0:45:2.5",
    "fig6": "0:40:2.5",
    "fig7": "0:45:5",
}
FIGURE_DELAYS = {"fig3": (1.1, 2.0, 3.1), "fig4": (1.1, 2.0, 3.1), "fig5": (1.1, 2.0, 3.1), "fig7": (5.0,)}
FIGURE_BUFFER = 60


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    scheme: str | None = None
    s0: float | None = None
    r0: float | None = None
    omega_s: float = 1.0
    omega_r: float = 1.0
    gamma_db: float | None = None
    gamma_budget_db: float | None = None
    ps: float | None = None
    pr: float | None = None
    target_delay: float | None = None
    buffer_packets: int | None = None
    qmax_bits: float | None = None
    k: int | None = None
    n_relay: int | None = None
    slots: int = DEFAULT_SLOTS
    seed: int = 0
    transient: str | None = None
    fifo: bool = False
    format: str = "csv"
    out: str | None = None
    axis: str | None = None
    values: tuple = ()
    figure: str | None = None
    gammas: tuple = ()
    delay_targets: tuple = ()
    simulate: bool = True
    workers: int = 1

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["values"] = list(self.values)
        d["gammas"] = list(self.gammas)
        d["delay_targets"] = list(self.delay_targets)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError([f"unknown config key {k!r}" for k in unknown])
        d = dict(d)
        for key in ("values", "gammas", "delay_targets"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    # -- conversion to engine configs --

    def rates(self) -> RateConfig:
        s0 = self.s0
        r0 = self.r0 if self.r0 is not None else s0
        return RateConfig(s0, r0)

    def run_config(self) -> RunConfig:
        rates = self.rates()
        outage = None
        params = ChannelParams(self.omega_s, self.omega_r)
        if self.ps is not None:
            outage = OutageProfile(self.ps, self.pr)
        else:
            g_db = self.gamma_db if self.gamma_db is not None else self.gamma_budget_db
            if g_db is not None:
                params = ChannelParams.from_gamma_db(g_db, self.omega_s, self.omega_r)
        return RunConfig(
            scheme=self.scheme,
            rates=rates,
            params=params,
            outage=outage,
            slots=self.slots,
            seed=self.seed,
            transient=self.transient,
            target_delay=self.target_delay,
            buffer_packets=self.buffer_packets,
            qmax_bits=self.qmax_bits,
            k=self.k,
            n_relay=self.n_relay,
            gamma_budget=None if self.gamma_budget_db is None else db_to_linear(self.gamma_budget_db),
            fifo=self.fifo,
        )


# -- parsing ------------------------------------------------------------------


def parse_grid(text: str) -> tuple:
    """'a:b:step' (inclusive) or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            a, b, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            return tuple(round(a + i * step, 12) for i in range(max(n, 0)))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"cannot read grid {text!r}; use start:stop:step or a comma list") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with a saved configuration; flags override it")
    p.add_argument("--print-config", action="store_true", help="print the validated configuration as JSON and exit")
    p.add_argument("--slots", type=int, help=f"simulated slots N (default {DEFAULT_SLOTS})")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--workers", type=int, help="parallel processes for sweeps and figures")


def _scheme_flags(p: argparse.ArgumentParser):
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--s0", type=float, help="source rate, bits/slot")
    p.add_argument("--r0", type=float, help="relay rate, bits/slot (fixed-rate schemes)")
    p.add_argument("--omega-s", type=float, help="mean S-R channel gain (default 1)")
    p.add_argument("--omega-r", type=float, help="mean R-D channel gain (default 1)")
    p.add_argument("--gamma-db", type=float, help="transmit SNR of both nodes, dB")
    p.add_argument("--gamma-budget-db", type=float, help="average power budget for power allocation, dB")
    p.add_argument("--ps", type=float, help="S-R outage probability (instead of --gamma-db)")
    p.add_argument("--pr", type=float, help="R-D outage probability (instead of --gamma-db)")
    p.add_argument("--target-delay", type=float, help="mean delay target in slots")
    p.add_argument("--buffer-packets", type=int, metavar="L")
    p.add_argument("--qmax-bits", type=float)
    p.add_argument("--k", type=int, help="source slots per cycle of the k/n schedule")
    p.add_argument("--n-relay", type=int, help="relay slots per cycle of the k/n schedule")
    p.add_argument("--transient", choices=TRANSIENT_MODES)
    p.add_argument("--fifo", action="store_true", default=None, help="also measure per-bit FIFO delay")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="barelay", description="Buffer-aided relaying: analysis, simulation and figure tables.")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode in ("analyze", "simulate", "sweep"):
        p = sub.add_parser(mode)
        _scheme_flags(p)
        _common(p)
        if mode == "sweep":
            p.add_argument("--axis", choices=SWEEP_AXES)
            p.add_argument("--values", help="start:stop:step or comma list")
            p.add_argument("--no-sim", dest="simulate", action="store_false", default=None)
    p = sub.add_parser("reproduce")
    p.add_argument("figure", nargs="?", help=", ".join(FIGURES))
    p.add_argument("--gammas", help="SNR grid in dB, start:stop:step or comma list")
    p.add_argument("--delay-targets", help="comma list of mean delay targets")
    p.add_argument("--no-sim", dest="simulate", action="store_false", default=None)
    _common(p)
    return parser


_FLAG = {
    "s0": "--s0", "r0": "--r0", "ps": "--ps", "pr": "--pr", "gamma_db": "--gamma-db",
    "gamma_budget_db": "--gamma-budget-db", "target_delay": "--target-delay", "k": "--k",
    "n_relay": "--n-relay", "qmax_bits": "--qmax-bits", "scheme": "--scheme", "axis": "--axis",
    "values": "--values", "figure": "figure",
}  # fmt: skip


def parse_config(argv=None) -> ExperimentConfig:
    """Turn command-line arguments (and an optional JSON file) into a validated config.

    Raises
    ------
    ConfigError
        Listing every problem found, not just the first.
    """
    ns = build_parser().parse_args(argv)
    base = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        if base.get("mode", ns.mode) != ns.mode:
            raise ConfigError(f"config file is for mode {base['mode']!r}, not {ns.mode!r}")
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    merged = dict(base)
    merged["mode"] = ns.mode
    for key, val in vars(ns).items():
        if key in fields and val is not None and key != "mode":
            merged[key] = val
    for key in ("values", "gammas"):
        if isinstance(merged.get(key), str):
            merged[key] = parse_grid(merged[key])
    if isinstance(merged.get("delay_targets"), str):
        merged["delay_targets"] = parse_grid(merged["delay_targets"])
    cfg = ExperimentConfig.from_dict(merged)
    validate(cfg)
    if ns.print_config:
        raise _PrintConfig(cfg)
    return cfg


class _PrintConfig(Exception):
    def __init__(self, cfg):
        self.cfg = cfg


def validate(cfg: ExperimentConfig) -> None:
    problems = []

    def missing(name, why=""):
        problems.append(f"missing parameter {_FLAG.get(name, name)}{why}")

    if cfg.slots < 1:
        problems.append("--slots must be at least 1")
    if cfg.workers < 1:
        problems.append("--workers must be at least 1")
    if cfg.mode == "reproduce":
        if cfg.figure is None:
            missing("figure", f" (one of {', '.join(FIGURES)})")
        elif cfg.figure not in FIGURES:
            problems.append(f"unknown figure {cfg.figure!r}; choose from {', '.join(FIGURES)}")
        if problems:
            raise ConfigError(problems)
        return

    scheme = cfg.scheme
    if scheme is None:
        missing("scheme")
        raise ConfigError(problems)
    if cfg.s0 is None:
        missing("s0")
    elif not cfg.s0 > 0:
        problems.append("--s0 must be positive")
    if scheme in _FIXED_SCHEMES and cfg.r0 is None:
        missing("r0", f" (scheme {scheme} transmits at a fixed relay rate)")
    if cfg.r0 is not None and not cfg.r0 > 0:
        problems.append("--r0 must be positive")

    axis = cfg.axis if cfg.mode == "sweep" else None
    by_outage = cfg.ps is not None or cfg.pr is not None
    by_snr = cfg.gamma_db is not None or axis in _GAMMA_AXES
    if by_outage and cfg.gamma_db is not None:
        problems.append("--gamma-db conflicts with --ps/--pr: the outage probabilities follow from the SNR")
    if by_outage and axis in _GAMMA_AXES:
        problems.append(f"sweeping {axis} conflicts with --ps/--pr")
    if by_outage:
        for name in ("ps", "pr"):
            v = getattr(cfg, name)
            if v is None:
                missing(name)
            elif not 0.0 <= v <= 1.0:
                problems.append(f"--{name} must lie in [0, 1]")
        if scheme in _MIXED_SCHEMES:
            problems.append(f"scheme {scheme} needs the relay's mean SNR; give --gamma-db instead of --ps/--pr")
    if not by_outage and not by_snr and not (scheme == "mixed-pa" and cfg.gamma_budget_db is not None):
        missing("gamma_db", " (or --ps and --pr)")
    for name in ("omega_s", "omega_r"):
        if not getattr(cfg, name) > 0:
            problems.append(f"--{name.replace('_', '-')} must be positive")

    if scheme.startswith("fixed-delay") and cfg.target_delay is None and axis != "target_delay":
        missing("target_delay")
    if scheme == "mixed-pa" and cfg.gamma_budget_db is None and axis != "gamma_budget_db":
        missing("gamma_budget_db")
    if scheme == "mixed-delay" and cfg.qmax_bits is None and cfg.target_delay is None and axis not in ("qmax_bits", "target_delay"):
        missing("qmax_bits", " (or --target-delay to tune it)")
    if scheme == "conv-mixed-kn" and (cfg.k is None or cfg.n_relay is None) and cfg.target_delay is None:
        for name in ("k", "n_relay"):
            if getattr(cfg, name) is None:
                missing(name, " (or --target-delay to search for a schedule)")
    for name in ("k", "n_relay", "buffer_packets"):
        v = getattr(cfg, name)
        if v is not None and v < 1:
            problems.append(f"--{name.replace('_', '-')} must be at least 1")
    if cfg.target_delay is not None and not cfg.target_delay > 0:
        problems.append("--target-delay must be positive")
    if cfg.mode == "sweep":
        if cfg.axis is None:
            missing("axis")
        if not cfg.values:
            missing("values")
    if problems:
        raise ConfigError(problems)
    if scheme in _FIXED_SCHEMES:
        try:
            cfg.rates()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


# -- rows and emission ----------------------------------------------------------


def make_row(gamma_db, scheme, analytic=None, sim=None, seed=None, n_slots=None, **extra) -> dict:
    """One output record: ``analytic`` is a dict from ``analyze``, ``sim`` a SimResult dict."""
    a = analytic or {}
    row = {
        "gamma_db": gamma_db,
        "scheme": scheme,
        "ps": a.get("ps"),
        "pr": a.get("pr"),
        "pc": a.get("pc"),
        "case": a.get("case"),
        "analytic": {"throughput": a.get("throughput"), "outage": a.get("outage"), "delay": a.get("delay")},
        "simulated": None,
        "seed": seed if sim is not None else None,
        "n_slots": n_slots if sim is not None else None,
    }
    if sim is not None:
        row["simulated"] = {"throughput": sim.get("throughput"), "outage": sim.get("outage"), "delay": sim.get("delay")}
    row.update(extra)
    return row


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def emit(rows, fmt: str = "csv", out=None) -> str:
    """Serialise ``rows``; writes to ``out`` (a path) when given and returns the text."""
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r}")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            a = r.get("analytic") or {}
            s = r.get("simulated") or {}
            w.writerow(
                _cell(v)
                for v in (
                    r.get("gamma_db"), r.get("scheme"), r.get("ps"), r.get("pr"), r.get("pc"), r.get("case"),
                    a.get("throughput"), s.get("throughput"), a.get("outage"), s.get("outage"),
                    a.get("delay"), s.get("delay"), r.get("seed"), r.get("n_slots"),
                )  # fmt: skip
            )
        text = buf.getvalue()
    else:
        text = json.dumps([_jsonable(r) for r in rows], sort_keys=True, indent=2, allow_nan=True) + "\n"
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


# -- single runs ----------------------------------------------------------------


def _sim_block(res, steady: bool) -> dict:
    return {
        "throughput": res.throughput,
        "outage": res.outage,
        # the prefilled buffer of a steady run makes its queue length meaningless
        "delay": None if steady else res.mean_delay,
    }


def _resolve_tuned(rc: RunConfig, target: float | None) -> RunConfig:
    """Fill in a tuned Q_max or k/n schedule when only a delay target was given."""
    if rc.scheme == "mixed-delay" and rc.qmax_bits is None and target is not None:
        return replace(rc, qmax_bits=tune_qmax(rc, target))
    if rc.scheme == "conv-mixed-kn" and (rc.k is None or rc.n_relay is None) and target is not None:
        sched = best_kn_schedule(rc, target)
        return replace(rc, k=sched.k, n_relay=sched.n)
    return rc


def _gamma_of(cfg: ExperimentConfig, rc: RunConfig):
    if cfg.gamma_db is not None:
        return cfg.gamma_db
    if rc.outage is None and cfg.gamma_budget_db is not None:
        return cfg.gamma_budget_db
    return None


def run_single(cfg: ExperimentConfig, with_sim: bool) -> list[dict]:
    rc = _resolve_tuned(cfg.run_config(), cfg.target_delay)
    analytic = analyze(rc)
    sim = None
    if with_sim:
        res = simulate(rc)
        sim = _sim_block(res, rc.transient_mode == "steady" and rc.scheme in ("fixed-optimal", "mixed", "mixed-pa"))
    extra = {}
    if rc.scheme == "mixed-delay":
        extra["qmax_bits"] = rc.qmax_bits
    if rc.scheme == "conv-mixed-kn":
        extra.update(k=rc.k, n_relay=rc.n_relay)
    return [make_row(_gamma_of(cfg, rc), rc.scheme, analytic, sim, rc.seed, rc.slots, **extra)]


def run_sweep(cfg: ExperimentConfig) -> list[dict]:
    rc = cfg.run_config()
    if cfg.axis in _GAMMA_AXES:
        rc = replace(rc, outage=None)
    values = [int(v) if cfg.axis == "buffer_packets" else v for v in cfg.values]
    points = sweep(rc, cfg.axis, values, simulate_points=cfg.simulate, workers=cfg.workers)
    rows = []
    for pt in points:
        gamma = pt["value"] if cfg.axis in _GAMMA_AXES else cfg.gamma_db
        sim = None
        if pt["sim"] is not None:
            s = pt["sim"]
            steady = rc.transient_mode == "steady" and rc.scheme in ("fixed-optimal", "mixed", "mixed-pa")
            sim = {"throughput": s["throughput"], "outage": s["outage"], "delay": None if steady else s["mean_delay"]}
        rows.append(make_row(gamma, rc.scheme, pt["analytic"], sim, pt["seed"], pt["n_slots"], axis=pt["axis"], value=pt["value"]))
    return rows


# -- figures --------------------------------------------------------------------


def _fig_fixed_point(job):
    """Delay-unconstrained fixed rate at one (omega_s, gamma): BA vs block split."""
    g_db, omega_s, seed, slots, with_sim, ratio = job
    rates = RateConfig(2.0, 2.0)
    params = ChannelParams.from_gamma_db(g_db, omega_s, 1.0)
    prof = outage_probs(params, rates)
    label = f"@omega_s={omega_s:g}"
    rc = RunConfig("fixed-optimal", rates, params=params, slots=slots, seed=seed)
    a = analyze(rc)
    sim = None
    if with_sim:
        res = simulate(rc)
        sim = {"throughput": res.throughput, "outage": res.outage, "delay": None}
    conv = conv1_fixed(prof, 2.0, 2.0)
    rows = [
        make_row(g_db, "fixed-optimal" + label, a, sim, seed, slots),
        make_row(g_db, "conv1-fixed" + label, {"ps": prof.p_s, "pr": prof.p_r, "throughput": conv.throughput, "outage": conv.outage}),
    ]
    if ratio:
        r_sim = None if sim is None or conv.throughput == 0 else {"throughput": sim["throughput"] / conv.throughput}
        r_an = a["throughput"] / conv.throughput if conv.throughput > 0 else None
        rows.append(make_row(g_db, "ratio-ba-conv1" + label, {"ps": prof.p_s, "pr": prof.p_r, "throughput": r_an}, r_sim, seed, slots))
    return rows


def _fig_delay_point(job):
    """Delay-constrained fixed rate at one gamma, one row per achievable target."""
    g_db, targets, seed, slots, with_sim = job
    rates = RateConfig(2.0, 2.0)
    params = ChannelParams.from_gamma_db(g_db, 1.0, 1.0)
    prof = outage_probs(params, rates)
    base = {"ps": prof.p_s, "pr": prof.p_r}
    rows = [
        make_row(g_db, "fixed-optimal", {**base, "throughput": throughput_optimal(prof, rates), "outage": outage_optimal(prof, rates)}),
    ]
    tau2, f2 = conv2_fixed(prof, 2.0)
    rows.append(make_row(g_db, "conv2-fixed", {**base, "throughput": tau2, "outage": f2, "delay": 1.0}))
    for j, target in enumerate(targets):
        try:
            dv = tune_delay(target, prof)
        except UnachievableDelayError:
            continue
        scheme = f"fixed-delay-v{int(dv.variant)}"
        m = markov_metrics(dv.variant, prof, dv.p_c, FIGURE_BUFFER, rates)
        a = {**base, "pc": dv.p_c, "case": f"V{int(dv.variant)}", "throughput": m.throughput, "outage": m.outage, "delay": m.mean_delay}
        sim = None
        s = seed ^ (j + 1) << 16
        if with_sim:
            rc = RunConfig(scheme, rates, params=params, slots=slots, seed=s, p_c=dv.p_c, buffer_packets=FIGURE_BUFFER)
            res = simulate(rc)
            sim = {"throughput": res.throughput, "outage": res.outage, "delay": res.mean_delay}
        rows.append(make_row(g_db, f"{scheme}@target_delay={target:g}", a, sim, s, slots))
    return rows


def _fig_pa_point(job):
    """Mixed rate without delay limit, with and without power allocation."""
    g_db, seed, slots, with_sim = job
    rates = RateConfig(2.0, 2.0)
    params = ChannelParams.from_gamma_db(g_db, 10.0, 1.0)
    budget = db_to_linear(g_db)
    prof = outage_probs(params, rates)
    base = {"ps": prof.p_s, "pr": prof.p_r}
    rows = []
    for scheme in ("mixed", "mixed-pa"):
        rc = RunConfig(scheme, rates, params=params, slots=slots, seed=seed, gamma_budget=budget)
        a = analyze(rc)
        sim = None
        if with_sim:
            res = simulate(rc)
            sim = {"throughput": res.throughput, "outage": None, "delay": None}
        rows.append(make_row(g_db, scheme, a, sim, seed, slots))
    cap = params.fading.link(params.omega_r).log2_tail(0.0)
    rows.append(make_row(g_db, "conv1-mixed", {**base, "throughput": conv1_mixed(prof, 2.0, cap).throughput}))
    pa = conv1_mixed_pa(prof, 2.0, params.gamma_s, budget, params.omega_bar_r, params.fading)
    rows.append(make_row(g_db, "conv1-mixed-pa", {**base, "throughput": pa.throughput}))
    return rows


def _fig_mixed_delay_point(job):
    """Mixed rate at a mean delay target: tuned heuristic, best k/n, fixed rate and bounds."""
    g_db, target, seed, slots, with_sim = job
    rates = RateConfig(2.0, 2.0)
    params = ChannelParams.from_gamma_db(g_db, 1.0, 1.0)
    prof = outage_probs(params, rates)
    base = {"ps": prof.p_s, "pr": prof.p_r}
    rows = []
    pol = mixed_policy(prof, rates, params.omega_r, params.fading)
    rows.append(make_row(g_db, "mixed", {**base, "case": 2 if pol.case2 else 1, "throughput": pol.throughput}))
    rows.append(make_row(g_db, "mixed-delay-bound", {**base, "throughput": conv_mixed_high_snr(target, 2.0)[0], "delay": target}))
    try:
        dv = tune_delay(target, prof)
        m = markov_metrics(dv.variant, prof, dv.p_c, FIGURE_BUFFER, rates)
        rows.append(make_row(
            g_db, f"fixed-delay-v{int(dv.variant)}",
            {**base, "pc": dv.p_c, "case": f"V{int(dv.variant)}", "throughput": m.throughput, "outage": m.outage, "delay": m.mean_delay},
        ))  # fmt: skip
    except UnachievableDelayError:
        pass
    if with_sim:
        rc = RunConfig("mixed-delay", rates, params=params, slots=slots, seed=seed)
        try:
            rc = replace(rc, qmax_bits=tune_qmax(rc, target))
            res = simulate(rc)
            sim = {"throughput": res.throughput, "outage": None, "delay": res.mean_delay}
            rows.append(make_row(g_db, "mixed-delay", {**base, "delay": target}, sim, seed, slots, qmax_bits=rc.qmax_bits))
        except UnachievableDelayError:
            pass
        rc = RunConfig("conv-mixed-kn", rates, params=params, slots=slots, seed=seed)
        try:
            sched = best_kn_schedule(rc, target)
        except UnachievableDelayError:
            sched = None
        if sched is not None:
            rc = replace(rc, k=sched.k, n_relay=sched.n)
            res = simulate(rc)
            cap = params.fading.link(params.omega_r).log2_tail(0.0)
            a = {**base, "throughput": conv_mixed_delay(sched, prof, 2.0, cap)}
            sim = {"throughput": res.throughput, "outage": None, "delay": res.mean_delay}
            rows.append(make_row(g_db, f"conv-mixed-kn@k={sched.k},n={sched.n}", a, sim, seed, slots, k=sched.k, n_relay=sched.n))
    return rows


def _figure_jobs(cfg: ExperimentConfig):
    fig = cfg.figure
    gammas = cfg.gammas or parse_grid(FIGURE_GAMMAS[fig])
    targets = cfg.delay_targets or FIGURE_DELAYS.get(fig, ())
    sim = cfg.simulate
    if fig in ("fig2a", "fig2"):
        jobs = []
        for omega_s in (0.1, 1.0, 10.0):
            for g in gammas:
                jobs.append((g, omega_s, cfg.seed ^ len(jobs), cfg.slots, sim, fig == "fig2a"))
        return _fig_fixed_point, jobs
    if fig in ("fig3", "fig4", "fig5"):
        return _fig_delay_point, [(g, tuple(targets), cfg.seed ^ i, cfg.slots, sim) for i, g in enumerate(gammas)]
    if fig == "fig6":
        return _fig_pa_point, [(g, cfg.seed ^ i, cfg.slots, sim) for i, g in enumerate(gammas)]
    jobs = []
    for t in targets:
        for g in gammas:
            jobs.append((g, t, cfg.seed ^ len(jobs), cfg.slots, sim))
    return _fig_mixed_delay_point, jobs


def reproduce_figure(cfg: ExperimentConfig) -> list[dict]:
    """Rows of the named figure; every job is independent, so order is fixed by the job list."""
    if cfg.figure not in FIGURES:
        raise ConfigError(f"unknown figure {cfg.figure!r}; choose from {', '.join(FIGURES)}")
    fn, jobs = _figure_jobs(cfg)
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(fn, jobs))
    else:
        chunks = [fn(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


# -- entry point ----------------------------------------------------------------


def execute(cfg: ExperimentConfig) -> list[dict]:
    if cfg.mode == "analyze":
        return run_single(cfg, with_sim=False)
    if cfg.mode == "simulate":
        return run_single(cfg, with_sim=True)
    if cfg.mode == "sweep":
        return run_sweep(cfg)
    return reproduce_figure(cfg)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        rows = execute(cfg)
        text = emit(rows, cfg.format, cfg.out)
        if cfg.out is None:
            sys.stdout.write(text)
        return EXIT_OK
    except _PrintConfig as pc:
        sys.stdout.write(pc.cfg.to_json())
        return EXIT_OK
    except ConfigError as exc:
        for p in exc.problems:
            print(f"barelay: error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    except UnachievableDelayError as exc:
        print(f"barelay: unachievable delay: {exc}", file=sys.stderr)
        return EXIT_DELAY
    except SolverError as exc:
        print(f"barelay: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (RelayError, ValueError) as exc:
        print(f"barelay: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"barelay: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
