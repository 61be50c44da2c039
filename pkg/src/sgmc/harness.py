"""Monte-Carlo FER campaigns, bound sweeps and their file formats.

Frame ``f`` at SNR index ``i`` uses the key ``derive(key_of(seed, i), f)``,
so outcomes depend only on the configuration.  Frames are decoded in blocks
that may run on several threads (the kernels release the GIL); the stopping
rule is applied frame by frame in index order, which makes every count
independent of the worker count and of the block schedule.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from . import _decode_kernels as K
from .bounds.bonferroni import bonferroni_lb
from .bounds.curves import KINDS, BoundCurve, BoundPoint, write_curves_csv
from .bounds.exponent import staircase_exponent
from .bounds.rcu import conventional_rcu, partial_rcu
from .channel import AWGN, BSC, SNR_CONVENTION, ChannelSpec
from .construction import Profile, nu_profile, read_profile, rm_profile, sample_generator
from .decoders import DECODERS
from .rng import key_of
from .spectrum import sgmc_spectrum, union_bound

FIRST_BLOCK = 64
MAX_BLOCK = 1024
RECORD_COLUMNS = (
    "snr_db", "frames", "frame_errors", "fer", "ci_low", "ci_high", "avg_teps", "wall_per_frame", "optimal_rate",
)


def parse_profile(spec) -> Profile:
    """``"rm r m"``, ``"nu n k w0"``, ``"file PATH"`` or explicit widths (list, "4 2 1 1" or "4,2,1,1")."""
    if isinstance(spec, Profile):
        return spec
    if isinstance(spec, (list, tuple)):
        return Profile(tuple(int(w) for w in spec))
    parts = str(spec).replace(",", " ").split()
    if parts and all(t.isdigit() for t in parts):
        return Profile(tuple(int(t) for t in parts))
    if not parts:
        raise ValueError("empty profile string")
    head, args = parts[0].lower(), parts[1:]
    try:
        if head == "rm" and len(args) == 2:
            return rm_profile(int(args[0]), int(args[1]))
        if head == "nu" and len(args) == 3:
            return nu_profile(int(args[0]), int(args[1]), int(args[2]))
    except ValueError as exc:
        raise ValueError(f"bad profile string {spec!r}: {exc}") from exc
    if head == "file" and len(args) == 1:
        return read_profile(args[0])
    raise ValueError(f"bad profile string {spec!r}; expected 'rm r m', 'nu n k w0', 'file PATH' or widths")


@dataclass
class SimConfig:
    """Everything that determines a simulation campaign."""

    profile: object = "nu 32 16 8"
    code_seed: int = 1
    channel: str = AWGN
    snr: list = field(default_factory=lambda: [2.0])
    decoder: str = "lc-rosd"
    delta: int = 8
    lmax: int = 1 << 16
    order: int = 2
    min_errors: int = 100
    max_frames: int = 10**7
    seed: int = 0
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        self.snr = [float(s) for s in (self.snr if isinstance(self.snr, (list, tuple)) else [self.snr])]
        self.validate()

    def validate(self) -> None:
        self.get_profile()
        if self.channel not in (AWGN, BSC):
            raise ValueError(f"channel must be '{AWGN}' or '{BSC}', got {self.channel!r}")
        if not self.snr:
            raise ValueError("snr list must be nonempty")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {sorted(DECODERS)}, got {self.decoder!r}")
        if self.min_errors < 1:
            raise ValueError("min_errors must be >= 1")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.lmax < 1:
            raise ValueError("lmax must be >= 1")
        if self.order < 0:
            raise ValueError("order must be >= 0")
        p = self.get_profile()
        if self.decoder in ("lc-rosd", "lc-osd"):
            if not 0 <= self.delta <= min(p.n - p.k, K.MAX_DELTA):
                raise ValueError(f"delta must lie in [0, {min(p.n - p.k, K.MAX_DELTA)}], got {self.delta}")
        if self.decoder == "ml" and p.k > 24:
            raise ValueError("ml decoder needs k <= 24")

    def get_profile(self) -> Profile:
        return parse_profile(self.profile)

    def channel_at(self, snr_db: float) -> ChannelSpec:
        rate = self.get_profile().k / self.get_profile().n
        if self.channel == AWGN:
            return ChannelSpec.awgn_ebn0(snr_db, rate)
        return ChannelSpec.bsc_ebn0(snr_db, rate)

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(self.profile, Profile):
            d["profile"] = list(self.profile.widths)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> "SimConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def wilson_interval(errors: int, frames: int, level: float = 0.95) -> tuple[float, float]:
    if frames == 0:
        return 0.0, 1.0
    ci = binomtest(int(errors), int(frames)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class SimRecord:
    snr_db: float
    frames: int
    frame_errors: int
    fer: float
    ci_low: float
    ci_high: float
    avg_teps: float
    wall_per_frame: float
    optimal_rate: float

    @classmethod
    def from_counts(cls, snr_db, frames, errors, teps_sum, wall, optimal) -> "SimRecord":
        lo, hi = wilson_interval(errors, frames)
        return cls(
            float(snr_db), int(frames), int(errors), errors / frames if frames else 0.0, lo, hi,
            teps_sum / frames if frames else 0.0, wall / frames if frames else 0.0, optimal / frames if frames else 0.0,
        )


class _Runner:
    def __init__(self, config: SimConfig):
        self.cfg = config
        profile = config.get_profile()
        code = sample_generator(profile, config.code_seed)
        self.code = code
        self.gbits = np.ascontiguousarray(code.bits)
        self.gw = np.ascontiguousarray(code.generator.words)
        self.starts = np.array(profile.starts, np.int64)
        self.ends = np.array(profile.ends, np.int64)
        self.decoder = DECODERS[config.decoder]
        self.delta = config.delta if self.decoder in (K.LC_ROSD, K.LC_OSD) else 0

    def block(self, spec: ChannelSpec, snr_key: int, f0: int, f1: int):
        m = f1 - f0
        err = np.zeros(m, np.uint8)
        teps = np.zeros(m, np.int64)
        opt = np.zeros(m, np.uint8)
        t = time.perf_counter()
        K.simulate_frames(
            self.gbits, self.gw, self.starts, self.ends, self.decoder, self.delta, self.cfg.lmax, self.cfg.order,
            spec.kind_code, float(spec.noise), np.uint64(snr_key), f0, f1, err, teps, opt,
        )
        return err, teps, opt, time.perf_counter() - t


def _schedule(max_frames: int):
    f, size = 0, FIRST_BLOCK
    while f < max_frames:
        end = min(max_frames, f + size)
        yield f, end
        f = end
        size = min(MAX_BLOCK, size * 2)


def _simulate_point(runner: _Runner, pool, i: int, snr_db: float) -> SimRecord:
    cfg = runner.cfg
    spec = cfg.channel_at(snr_db)
    snr_key = key_of(cfg.seed, i)
    blocks = _schedule(cfg.max_frames)
    frames = errors = teps_sum = optimal = 0
    wall = 0.0
    done = False
    while not done:
        batch = [b for _, b in zip(range(cfg.workers), blocks)]
        if not batch:
            break
        if pool is None:
            results = [runner.block(spec, snr_key, f0, f1) for f0, f1 in batch]
        else:
            results = list(pool.map(lambda b: runner.block(spec, snr_key, *b), batch))
        for err, teps, opt, dt in results:
            need = cfg.min_errors - errors
            cum = np.cumsum(err, dtype=np.int64)
            hit = np.searchsorted(cum, need)
            take = len(err) if hit >= len(err) else int(hit) + 1
            frames += take
            errors += int(cum[take - 1]) if take else 0
            teps_sum += int(teps[:take].sum())
            optimal += int(opt[:take].sum())
            wall += dt * take / len(err)
            if errors >= cfg.min_errors:
                done = True
                break
    return SimRecord.from_counts(snr_db, frames, errors, teps_sum, wall, optimal)


def run_simulation(config: SimConfig, progress=None) -> list[SimRecord]:
    """FER, average TEP count and optimality rate at every SNR of the config."""
    config.validate()
    runner = _Runner(config)
    records = []
    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        for i, snr in enumerate(config.snr):
            rec = _simulate_point(runner, pool, i, snr)
            records.append(rec)
            if progress is not None:
                progress(rec)
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def run_bounds(
    config: SimConfig,
    kinds=("UB", "partialRCU"),
    *,
    n_outer: int = 2000,
    bonferroni_count: int = 1023,
    mc_seed: int = 0,
) -> list[BoundCurve]:
    """Evaluate the requested bound kinds over the SNR list of ``config``.

    ``UB``, ``partialRCU``, ``RCU`` and ``exponentUB`` are ensemble quantities
    of the profile; ``BonferroniLB`` is evaluated on the sampled code.
    """
    kinds = list(kinds)
    if not kinds:
        raise ValueError("no bound kinds requested")
    bad = [k for k in kinds if k not in KINDS]
    if bad:
        raise ValueError(f"unknown bound kinds {bad}; expected a subset of {KINDS}")
    config.validate()
    profile = config.get_profile()
    soft = {"UB", "partialRCU", "RCU", "BonferroniLB"}
    if config.channel != AWGN and soft.intersection(kinds):
        raise ValueError(f"{sorted(soft.intersection(kinds))} are AWGN bounds; only exponentUB supports bsc")
    snrs = sorted(config.snr)
    base = {"profile": list(profile.widths), "channel": config.channel}
    curves = []
    for kind in kinds:
        meta = dict(base)
        if kind in ("partialRCU", "RCU"):
            meta.update(n_outer=n_outer, mc_seed=mc_seed)
        if kind == "BonferroniLB":
            meta.update(code_seed=config.code_seed, count=bonferroni_count)
        curve = BoundCurve(kind, [], meta)
        spectrum = sgmc_spectrum(profile) if kind == "UB" else None
        code = sample_generator(profile, config.code_seed) if kind == "BonferroniLB" else None
        for snr in snrs:
            ch = config.channel_at(snr)
            if kind == "UB":
                curve.append(snr, union_bound(spectrum, ch.sigma))
            elif kind == "partialRCU":
                e = partial_rcu(profile, ch, n_outer=n_outer, seed=mc_seed)
                lo, hi = e.ci
                curve.append(snr, e.value, lo, hi)
            elif kind == "RCU":
                e = conventional_rcu(profile.n, profile.k, ch, n_outer=n_outer, seed=mc_seed)
                lo, hi = e.ci
                curve.append(snr, e.value, lo, hi)
            elif kind == "BonferroniLB":
                curve.append(snr, bonferroni_lb(code, ch.sigma, bonferroni_count))
            else:
                curve.append(snr, staircase_exponent(profile, ch).bound)
        curves.append(curve)
    return curves


def _fmt(v) -> str:
    # repr is locale independent and round-trips floats exactly
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(int(v))


def emit_csv(items, path: str | Path) -> None:
    """Write SimRecords or BoundCurves as CSV with a fixed header."""
    items = list(items)
    if items and isinstance(items[0], BoundCurve):
        write_curves_csv(items, path)
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_COLUMNS)
        for r in items:
            w.writerow([_fmt(getattr(r, c)) for c in RECORD_COLUMNS])


def read_records_csv(path: str | Path) -> list[SimRecord]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != RECORD_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        out = []
        for row in r:
            vals = dict(zip(RECORD_COLUMNS, row))
            out.append(
                SimRecord(
                    float(vals["snr_db"]), int(vals["frames"]), int(vals["frame_errors"]),
                    *(float(vals[c]) for c in RECORD_COLUMNS[3:]),
                )
            )
        return out


def emit_json(items, path: str | Path, config: SimConfig | None = None) -> None:
    """JSON document with the SNR convention, optional config and the items."""
    items = list(items)
    doc: dict = {"convention": SNR_CONVENTION}
    if config is not None:
        doc["config"] = config.to_dict()
    if items and isinstance(items[0], BoundCurve):
        doc["curves"] = [
            {"kind": c.kind, "metadata": c.metadata, "points": [asdict(p) for p in c.points]} for c in items
        ]
    else:
        doc["records"] = [asdict(r) for r in items]
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def read_json(path: str | Path):
    """Inverse of :func:`emit_json`: a list of SimRecords or BoundCurves."""
    with open(path) as fh:
        doc = json.load(fh)
    if "records" in doc:
        return [SimRecord(**r) for r in doc["records"]]
    if "curves" in doc:
        return [BoundCurve(c["kind"], [BoundPoint(**p) for p in c["points"]], c["metadata"]) for c in doc["curves"]]
    raise ValueError(f"{path}: neither records nor curves found")


__all__ = [
    "SimConfig",
    "SimRecord",
    "RECORD_COLUMNS",
    "parse_profile",
    "wilson_interval",
    "run_simulation",
    "run_bounds",
    "emit_csv",
    "emit_json",
    "read_records_csv",
    "read_json",
]
