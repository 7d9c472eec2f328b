"""Command-line front end: ``uelpick {synth,pick,eval,qc}``.

Every command reads an optional flat ``key = value`` configuration file;
command-line flags override the file. Outputs are written under ``--out`` and
are reproducible byte for byte from the configuration.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .cluster import AssfConfig
from .ensemble import EnsembleConfig, UelConfig, seed_locations
from .evalqc import MetricReport, aggregate_metrics, nmo_correct, stack_section
from .fileio import (
    IoError,
    format_table,
    gather_image,
    read_gather,
    read_json,
    read_picks,
    spectrum_image,
    write_gather,
    write_json,
    write_pgm,
    write_picks,
    write_spectrum,
)
from .model import SurveyIndex, TimeAxis, UelError, VelocityAxis
from .regress import AlwlrConfig
from .spectrum import GainConfig, SemblanceConfig
from .survey import METHODS, compute_spectra, pick_survey
from .synth import SyntheticSurveyConfig, build_survey, noise_count

log = logging.getLogger("uelpick")

SWEEP_SNRS = "10,4,2,1,2/3,1/2,2/5,1/3"


class ConfigError(UelError):
    """A configuration key is unknown or holds an invalid value."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def parse_ratio(text: str) -> float:
    """``"2/3"``, ``"0.5"``, ``"10"`` or ``"inf"`` as a float."""
    text = text.strip()
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(Fraction(text))


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise ValueError("must fit in an unsigned 64-bit integer")
    return v


def _locations(text: str) -> tuple[SurveyIndex, ...]:
    out = []
    for item in text.replace(" ", "").split(","):
        if item:
            line, _, cdp = item.partition(":")
            out.append(SurveyIndex(int(line), int(cdp)))
    return tuple(out)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(" ", "").split(",") if x)


def _ratios(text: str) -> tuple[str, ...]:
    items = tuple(x for x in text.replace(" ", "").split(",") if x)
    for x in items:
        parse_ratio(x)
    return items


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], object]
    default: str
    check: Callable[[object], bool] | None = None
    rule: str = ""


_SYN = SyntheticSurveyConfig()
_UEL = UelConfig()

# every accepted configuration key, its parser, default and validity rule
KEYS: dict[str, Key] = {
    # survey and synthesis
    "lines": Key(int, str(_SYN.lines), _pos, "must be >= 1"),
    "cdps": Key(int, str(_SYN.cdps), _pos, "must be >= 1"),
    "t0": Key(float, repr(_SYN.taxis.t0)),
    "dt": Key(float, repr(_SYN.taxis.dt), _pos, "must be positive"),
    "nt": Key(int, str(_SYN.taxis.n), lambda v: v >= 2, "must be >= 2"),
    "v0": Key(float, repr(_SYN.vaxis.v0), _pos, "must be positive"),
    "dv": Key(float, repr(_SYN.vaxis.dv), _pos, "must be positive"),
    "nv": Key(int, str(_SYN.vaxis.m), lambda v: v >= 2, "must be >= 2"),
    "n_real_points": Key(int, str(_SYN.n_real_points), lambda v: v >= 2, "must be >= 2"),
    "snr": Key(parse_ratio, repr(_SYN.snr), _pos, "must be positive"),
    "offset_min": Key(float, "0.0", _nonneg, "must be nonnegative"),
    "offset_max": Key(float, "3000.0", _pos, "must be positive"),
    "offset_step": Key(float, "100.0", _pos, "must be positive"),
    "wavelet_freq": Key(float, repr(_SYN.wavelet_freq), _pos, "must be positive"),
    "seed": Key(_u64, str(_SYN.rng_seed)),
    "lateral_drift": Key(float, repr(_SYN.lateral_drift), _nonneg, "must be nonnegative"),
    "noise_sigma": Key(float, repr(_SYN.noise_sigma), _nonneg, "must be nonnegative"),
    "noise_amplitude": Key(float, repr(_SYN.noise_amplitude), _nonneg, "must be nonnegative"),
    "ambient_noise": Key(float, repr(_SYN.ambient_noise), _nonneg, "must be nonnegative"),
    "amplitude_decay": Key(float, repr(_SYN.amplitude_decay), _nonneg, "must be nonnegative"),
    # spectrum
    "semblance_m": Key(int, "2", _pos, "must be >= 1"),
    "gain_l": Key(int, str(_UEL.gain.L), _pos, "must be >= 1"),
    "gain_rescale": Key(_bool, str(_UEL.gain.rescale).lower()),
    "blur_w": Key(int, str(_UEL.blur_w), lambda v: v >= 3 and v % 2 == 1, "must be odd and >= 3"),
    "tau": Key(float, repr(_UEL.tau), lambda v: 0 <= v <= 1, "must lie in [0, 1]"),
    "near_tau": Key(float, repr(_UEL.near_tau), lambda v: 0 <= v <= 1, "must lie in [0, 1]"),
    # regression
    "alwlr_h": Key(float, repr(_UEL.alwlr.h), _pos, "must be positive"),
    "alwlr_lambda": Key(float, repr(_UEL.alwlr.lam), _nonneg, "must be nonnegative"),
    # clustering
    "sigma0": Key(float, repr(_UEL.assf.sigma0), _pos, "must be positive"),
    "growth": Key(float, repr(_UEL.assf.growth), lambda v: v > 1, "must exceed 1"),
    "alpha": Key(float, repr(_UEL.assf.alpha), _nonneg, "must be nonnegative"),
    "k_min": Key(int, str(_UEL.assf.k_min), _pos, "must be >= 1"),
    "t_merge": Key(float, repr(_UEL.assf.t_merge), _pos, "must be positive"),
    "t_conv": Key(float, repr(_UEL.assf.t_conv), _pos, "must be positive"),
    # ensemble
    "neighbor_radius": Key(int, str(_UEL.ensemble.neighbor_radius), _nonneg, "must be nonnegative"),
    "w_conf": Key(float, repr(_UEL.ensemble.w_conf), _nonneg, "must be nonnegative"),
    "t_min_gap": Key(float, repr(_UEL.ensemble.t_min_gap), _pos, "must be positive"),
    "int_v_min": Key(float, repr(_UEL.ensemble.int_v_range[0]), _pos, "must be positive"),
    "int_v_max": Key(float, repr(_UEL.ensemble.int_v_range[1]), _pos, "must be positive"),
    "seed_stride": Key(int, str(_UEL.ensemble.seed_stride), _pos, "must be >= 1"),
    "use_gain": Key(_bool, "true"),
    "use_near": Key(_bool, "true"),
    "use_seed": Key(_bool, "true"),
    "use_interval": Key(_bool, "true"),
    # baselines
    "kmeans_k": Key(int, "15", _pos, "must be >= 1"),
    "kmeans_seed": Key(_u64, "0"),
    "dbscan_eps": Key(float, "50.0", _pos, "must be positive"),
    "dbscan_min_samples": Key(int, "3", _pos, "must be >= 1"),
    # run control
    "method": Key(str, "uel", lambda v: v in METHODS, f"must be one of {', '.join(METHODS)}"),
    "workers": Key(int, "1", _pos, "must be >= 1"),
    "data_dir": Key(str, ""),
    "seeds_file": Key(str, ""),
    "save_spectra": Key(_bool, "false"),
    "images": Key(_bool, "false"),
    "qc_locations": Key(_locations, ""),
    "qc_lines": Key(_ints, ""),
    "stretch_limit": Key(float, "0.5", _pos, "must be positive"),
    "sweep_snrs": Key(_ratios, SWEEP_SNRS),
}


class RunConfig:
    """Validated key/value settings; attribute access by key name."""

    def __init__(self, raw: dict[str, str]):
        self.raw = {k: KEYS[k].default for k in KEYS}
        for key, text in raw.items():
            if key not in KEYS:
                raise ConfigError(key, "unknown configuration key")
            self.raw[key] = text
        self.values = {}
        for key, spec in KEYS.items():
            try:
                val = spec.parse(self.raw[key])
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(key, f"cannot parse {self.raw[key]!r} ({exc})") from None
            if spec.check is not None and not spec.check(val):
                raise ConfigError(key, f"{spec.rule}, got {self.raw[key]!r}")
            self.values[key] = val
        if not self.values["int_v_min"] < self.values["int_v_max"]:
            raise ConfigError("int_v_max", "must exceed int_v_min")
        if not self.values["offset_max"] > self.values["offset_min"]:
            raise ConfigError("offset_max", "must exceed offset_min")

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None

    def with_overrides(self, **kv) -> "RunConfig":
        raw = {k: v for k, v in self.raw.items()}
        raw.update({k: str(v) for k, v in kv.items()})
        return RunConfig(raw)

    # builders -----------------------------------------------------------------

    @property
    def taxis(self) -> TimeAxis:
        return TimeAxis(self.t0, self.dt, self.nt)

    @property
    def vaxis(self) -> VelocityAxis:
        return VelocityAxis(self.v0, self.dv, self.nv)

    def survey_config(self) -> SyntheticSurveyConfig:
        offsets = np.arange(self.offset_min, self.offset_max + 0.5 * self.offset_step, self.offset_step)
        try:
            return SyntheticSurveyConfig(
                lines=self.lines, cdps=self.cdps, taxis=self.taxis, vaxis=self.vaxis,
                n_real_points=self.n_real_points, snr=self.snr, offsets=tuple(offsets),
                wavelet_freq=self.wavelet_freq, rng_seed=self.seed,
                lateral_drift=self.lateral_drift, noise_sigma=self.noise_sigma,
                noise_amplitude=self.noise_amplitude, ambient_noise=self.ambient_noise,
                amplitude_decay=self.amplitude_decay,
            )
        except ValueError as exc:
            raise ConfigError("synthesis", str(exc)) from None

    def semblance_config(self) -> SemblanceConfig:
        return SemblanceConfig(self.semblance_m, self.vaxis)

    def uel_config(self) -> UelConfig:
        return UelConfig(
            gain=GainConfig(self.gain_l, self.gain_rescale),
            blur_w=self.blur_w,
            tau=self.tau,
            near_tau=self.near_tau,
            alwlr=AlwlrConfig(h=self.alwlr_h, lam=self.alwlr_lambda),
            assf=AssfConfig(self.sigma0, self.growth, self.alpha, self.k_min, self.t_merge, self.t_conv),
            ensemble=EnsembleConfig(self.neighbor_radius, self.w_conf, self.t_min_gap,
                                    (self.int_v_min, self.int_v_max), self.seed_stride),
            use_gain=self.use_gain,
            use_near=self.use_near,
            use_seed=self.use_seed,
            use_interval=self.use_interval,
        )

    def baseline_args(self) -> dict:
        if self.method == "kmeans":
            return {"k": self.kmeans_k, "seed": self.kmeans_seed}
        if self.method == "dbscan":
            return {"eps": self.dbscan_eps, "min_samples": self.dbscan_min_samples}
        return {}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(key or f"line {no}", f"{source}:{no}: expected 'key = value'")
        if key not in KEYS:
            raise ConfigError(key, f"{source}:{no}: unknown configuration key")
        out[key] = val.strip()
    return out


def load_config(path: str | None, overrides: dict[str, str] | None = None) -> RunConfig:
    raw = {}
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise IoError(f"cannot read config {path}: {exc.strerror or exc}") from None
        raw = parse_config_text(text, path)
    raw.update(overrides or {})
    return RunConfig(raw)


# dataset layout ---------------------------------------------------------------

def _stem(loc: SurveyIndex) -> str:
    return f"L{loc.line:04d}_C{loc.cdp:04d}"


def _snr_label(text: str) -> str:
    return "snr_" + text.replace("/", "_").replace(".", "p")


def cmd_synth(cfg: RunConfig, out: Path) -> dict:
    sc = cfg.survey_config()
    survey = build_survey(sc)
    locations = []
    for loc in survey.locations:
        stem = _stem(loc)
        write_gather(out / "gathers" / f"{stem}.gth", survey.gathers[loc])
        write_picks(out / "truth" / f"{stem}.picks", {loc: survey.truth[loc]})
        locations.append({
            "line": loc.line,
            "cdp": loc.cdp,
            "gather": f"gathers/{stem}.gth",
            "truth": f"truth/{stem}.picks",
            "noise_points": len(survey.noise_points[loc]),
        })
    manifest = {
        "format": "uelpick-dataset 1",
        "generator": f"uelpick {__version__}",
        "snr": cfg.raw["snr"],
        "snr_value": None if math.isinf(sc.snr) else sc.snr,
        "expected_noise_points": noise_count(sc.n_real_points, sc.snr),
        "config": {k: cfg.raw[k] for k in KEYS if k in _SYNTH_KEYS},
        "locations": locations,
    }
    write_json(out / "manifest.json", manifest)
    log.info("wrote %d gathers to %s", len(locations), out)
    return manifest


_SYNTH_KEYS = frozenset(
    "lines cdps t0 dt nt v0 dv nv n_real_points snr offset_min offset_max offset_step "
    "wavelet_freq seed lateral_drift noise_sigma noise_amplitude ambient_noise amplitude_decay".split()
)


def _load_manifest(data: Path) -> dict:
    path = data / "manifest.json"
    if not path.is_file():
        raise IoError(f"no dataset at {data} (missing manifest.json)")
    return read_json(path)


def load_truth(data: Path) -> dict:
    manifest = _load_manifest(data)
    truth = {}
    for rec in manifest["locations"]:
        curves, _ = read_picks(data / rec["truth"])
        truth.update(curves)
    return truth


def load_gathers(data: Path) -> dict:
    manifest = _load_manifest(data)
    gathers = {}
    for rec in manifest["locations"]:
        g = read_gather(data / rec["gather"])
        gathers[g.location] = g
    return gathers


def _seeds(cfg: RunConfig, data: Path, locs) -> dict:
    if cfg.seeds_file:
        curves, _ = read_picks(cfg.seeds_file)
        return curves
    truth = load_truth(data)
    chosen = seed_locations(locs, cfg.seed_stride)
    if not chosen:
        log.warning("seed_stride %d leaves no seed location on this grid", cfg.seed_stride)
    return {loc: truth[loc] for loc in chosen if loc in truth}


def cmd_pick(cfg: RunConfig, out: Path, data: Path) -> dict:
    gathers = load_gathers(data)
    locs = sorted(gathers)
    seeds = _seeds(cfg, data, locs)
    spectra = compute_spectra(gathers, cfg.semblance_config(), cfg.workers)
    if cfg.save_spectra:
        for loc, s in spectra.items():
            write_spectrum(out / "spectra" / f"{_stem(loc)}.spc", s)
    run = pick_survey(spectra, seeds, cfg.uel_config(), cfg.method, cfg.workers, cfg.baseline_args())
    write_picks(out / f"picks_{cfg.method}.txt", run.curves, seeds=seeds, comment=f"method={cfg.method}")
    errors = "".join(f"{loc.line} {loc.cdp} {msg}\n" for loc, msg in sorted(run.errors.items()))
    (out / f"errors_{cfg.method}.txt").write_text(errors)
    if cfg.images:
        for loc in locs:
            img = spectrum_image(spectra[loc], run.curves.get(loc))
            write_pgm(out / f"images_{cfg.method}" / f"{_stem(loc)}.pgm", img)
    log.info("picked %d of %d locations with %s", len(run.curves), len(locs), cfg.method)
    return {"picked": len(run.curves), "errors": len(run.errors)}


def evaluate(cfg: RunConfig, out: Path, data: Path) -> tuple[MetricReport, dict]:
    picks_path = out / f"picks_{cfg.method}.txt"
    if not picks_path.is_file():
        raise IoError(f"no picks at {picks_path}; run 'uelpick pick' first")
    auto, seeds = read_picks(picks_path)
    truth = load_truth(data)
    report = aggregate_metrics(auto, truth, cfg.taxis, exclude=seeds)
    err_path = out / f"errors_{cfg.method}.txt"
    failures = err_path.read_text().splitlines() if err_path.is_file() else []
    missing = sorted(set(truth) - set(auto))
    doc = {
        "method": cfg.method,
        "metrics": report.as_dict(),
        "seed_locations": [str(l) for l in sorted(seeds)],
        "missing_locations": [str(l) for l in missing],
        "failures": failures,
    }
    write_json(out / f"report_{cfg.method}.json", doc)
    (out / f"report_{cfg.method}.txt").write_text(format_table([(data.name or "dataset", report)]))
    return report, doc


def cmd_sweep(cfg: RunConfig, out: Path) -> list:
    rows, docs = [], {}
    for snr in cfg.sweep_snrs:
        sub = out / _snr_label(snr)
        c = cfg.with_overrides(snr=snr)
        cmd_synth(c, sub)
        cmd_pick(c, sub, sub)
        report, doc = evaluate(c, sub, sub)
        rows.append((snr, report))
        docs[snr] = doc
    (out / f"sweep_{cfg.method}.txt").write_text(format_table(rows))
    write_json(out / f"sweep_{cfg.method}.json",
               {"method": cfg.method, "rows": [{"snr": s, **r.as_dict()} for s, r in rows]})
    return rows


def cmd_qc(cfg: RunConfig, out: Path, data: Path) -> int:
    gathers = load_gathers(data)
    truth = load_truth(data)
    picks_path = out / f"picks_{cfg.method}.txt"
    auto, _ = read_picks(picks_path) if picks_path.is_file() else ({}, set())
    if not auto:
        raise IoError(f"no picks at {picks_path}; run 'uelpick pick' first")
    locs = cfg.qc_locations or (min(gathers),)
    lines = cfg.qc_lines or (min(gathers).line,)
    count = 0
    for loc in locs:
        if loc not in gathers:
            raise IoError(f"qc location {loc} not in dataset")
        for tag, curves in (("auto", auto), ("ref", truth)):
            if loc not in curves:
                continue
            g = nmo_correct(gathers[loc], curves[loc], cfg.stretch_limit)
            write_pgm(out / "qc" / f"nmo_{tag}_{_stem(loc)}.pgm", gather_image(g.traces))
            count += 1
    for line in lines:
        on_line = sorted(l for l in gathers if l.line == line)
        if not on_line:
            raise IoError(f"qc line {line} not in dataset")
        for tag, curves in (("auto", auto), ("ref", truth)):
            cols = [nmo_correct(gathers[l], curves[l], cfg.stretch_limit) for l in on_line if l in curves]
            if not cols:
                continue
            write_pgm(out / "qc" / f"section_{tag}_line{line:04d}.pgm", gather_image(stack_section(cols)))
            count += 1
    return count


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uelpick", description="Automatic stack-velocity picking.")
    p.add_argument("--version", action="version", version=f"uelpick {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH", help="key = value configuration file")
        sp.add_argument("--out", metavar="DIR", required=True, help="output directory")
        sp.add_argument("--seed", metavar="U64", help="random seed (overrides 'seed')")
        sp.add_argument("--snr", metavar="R", help="real/noise point ratio, e.g. 2/3 (overrides 'snr')")
        sp.add_argument("--method", choices=METHODS, help="picker (overrides 'method')")
        sp.add_argument("--workers", type=int, metavar="N", help="worker processes (overrides 'workers')")
        sp.add_argument("-v", "--verbose", action="count", default=0)

    for name, text in (
        ("synth", "generate a synthetic survey"),
        ("pick", "pick every location of a dataset"),
        ("eval", "score picks against the truth"),
        ("qc", "write NMO gather and stack-section images"),
    ):
        sp = sub.add_parser(name, help=text, description=text)
        common(sp)
        if name != "synth":
            sp.add_argument("--data", metavar="DIR", help="dataset directory (default: 'data_dir' or --out)")
        if name == "eval":
            sp.add_argument("--sweep", action="store_true",
                            help="synthesize, pick and score one dataset per value of 'sweep_snrs'")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {k: str(getattr(args, k)) for k in ("seed", "snr", "method", "workers")
                 if getattr(args, k) is not None}
    try:
        cfg = load_config(args.config, overrides)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        data = Path(getattr(args, "data", None) or cfg.data_dir or out)
        if args.command == "synth":
            m = cmd_synth(cfg, out)
            print(f"wrote {len(m['locations'])} locations to {out}")
        elif args.command == "pick":
            r = cmd_pick(cfg, out, data)
            print(f"picked {r['picked']} locations, {r['errors']} failures")
        elif args.command == "eval":
            if args.sweep:
                sys.stdout.write(format_table(cmd_sweep(cfg, out)))
            else:
                report, _ = evaluate(cfg, out, data)
                sys.stdout.write(format_table([(data.name or "dataset", report)]))
        else:
            n = cmd_qc(cfg, out, data)
            print(f"wrote {n} images to {out / 'qc'}")
    except ConfigError as exc:
        print(f"uelpick: configuration error: {exc}", file=sys.stderr)
        return 2
    except (UelError, ValueError, OSError) as exc:
        print(f"uelpick: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
