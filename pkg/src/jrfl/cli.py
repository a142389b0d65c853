"""Command-line batch harness.

Every subcommand samples its inputs from a counter-based generator keyed by
``(seed, trial, draw index)``, runs trials on a worker pool, and writes one
record per trial in input order between a versioned header and a summary
carrying :func:`jrfl.report.report_digest`.  The exit status is nonzero when
any verdict differs from the expected one.
"""

from __future__ import annotations

import argparse
import hashlib
import random
import struct
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from fractions import Fraction

from . import __version__
from .errors import ConfigError, ConstraintUnsatisfiable, JRFLError, NoSolution, Unstable
from .fibers import FiberProblem, _enumerate_side, fiber_bounds, ic_weight, weighted_count
from .local_fields import LocalField, PlaceData, _is_prime
from .local_matching import (
    check_cocycle,
    is_srs_element,
    match_record,
    point_digest,
    random_symmetric_element,
    random_unitary_element,
    solve_cocycle,
)
from .monoid_invariants import (
    companion_section,
    deformed_invariants,
    deformed_section,
    hinvariants,
    random_twisted,
    section_MH,
)
from .orbital import (
    case_a_scenario,
    case_b_scenario,
    fl_check,
    functional_equation_check,
    oi_double_path,
    random_fl_point,
)
from .report import SCHEMA, render, render_png, report_digest
from .satake import Coweight, kostka_foulkes, partitions, satake_value, sigma_out_fixed

SUBCOMMANDS = ("invariants", "match", "fiber", "oi", "fl-check", "casecheck", "feq", "kostka", "selftest")
OK_VERDICTS = frozenset({"ok", "equal", "skipped_odd_disc", "holds", "consistent", "stable"})


# ---------------------------------------------------------------------------
# randomness


class CounterRNG(random.Random):
    """``random.Random`` whose k-th 64-bit draw is ``blake2b(seed, trial, k)``."""

    def __new__(cls, seed, trial):
        return super().__new__(cls)

    def __init__(self, seed, trial):
        self._key = struct.pack(">Q", seed & 0xFFFFFFFFFFFFFFFF)
        self._trial = trial
        self._coord = 0
        super().__init__(0)

    def seed(self, *args, **kwargs):
        # state is the counter; the inherited Mersenne Twister is never used
        self._coord = 0

    def _draw(self):
        h = hashlib.blake2b(struct.pack(">QQ", self._trial, self._coord), key=self._key, digest_size=8)
        self._coord += 1
        return int.from_bytes(h.digest(), "big")

    def getrandbits(self, k):
        if k < 0:
            raise ValueError("number of bits must be non-negative")
        acc, have = 0, 0
        while have < k:
            acc = (acc << 64) | self._draw()
            have += 64
        return acc >> (have - k)

    def random(self):
        return self.getrandbits(53) * 2.0 ** -53

    def getstate(self):
        return (self._key, self._trial, self._coord)

    def setstate(self, state):
        self._key, self._trial, self._coord = state


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    p: int | None = None
    d: int = 1
    n: int = 2
    place: str = "inert"
    prec: int = 24
    seed: int = 0
    trials: int = 10
    lam: str | None = None
    bound: int | None = None
    workers: int = 1
    out: str | None = None
    case: str = "A"
    parity: str = "even"
    plot: str | None = None

    def place_data(self):
        p = self.p if self.p is not None else _smallest_prime_above(2 * self.n)
        try:
            return PlaceData(p, self.d, self.n, self.place, self.prec)
        except ValueError as exc:
            raise ConfigError(f"{exc}; for n = {self.n} use --q {_smallest_prime_above(2 * self.n)} or larger") from None

    def coweight(self):
        if self.lam is None:
            return Coweight.zero(self.n)
        try:
            lam = Coweight.parse(self.lam, self.n)
        except ValueError as exc:
            raise ConfigError(f"--lambda {self.lam!r}: {exc}; give {self.n} comma-separated decreasing entries") from None
        if not sigma_out_fixed(lam):
            raise ConfigError(f"--lambda {self.lam!r} is not fixed by the outer automorphism; use e.g. 1,-1")
        return lam

    def parity_value(self):
        return {"even": 0, "odd": 1, "any": None}[self.parity]


def _smallest_prime_above(m):
    k = m + 1
    while not _is_prime(k):
        k += 1
    return k


def _split_prime_power(q):
    for p in range(2, q + 1):
        if q % p == 0:
            d, r = 0, q
            while r % p == 0:
                r //= p
                d += 1
            if r != 1:
                raise ConfigError(f"--q {q} is not a prime power")
            return p, d
    raise ConfigError(f"--q {q} is not a prime power")


# flag name -> (RunConfig field, parser)
def _pos_int(name, minimum):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise ConfigError(f"{name} expects an integer, got {text!r}") from None
        if v < minimum:
            raise ConfigError(f"{name} must be at least {minimum}, got {v}")
        return v
    return parse


def _choice(name, options):
    def parse(text):
        if text not in options:
            raise ConfigError(f"{name} must be one of {', '.join(options)}, got {text!r}")
        return text
    return parse


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise ConfigError(f"--seed expects an integer, got {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise ConfigError("--seed must be a 64-bit unsigned integer")
    return v


KEYS = {
    "q": ("p", _pos_int("--q", 2)),
    "ext-degree": ("d", _pos_int("--ext-degree", 1)),
    "n": ("n", _pos_int("--n", 2)),
    "place": ("place", _choice("--place", ("split", "inert"))),
    "prec": ("prec", _pos_int("--prec", 1)),
    "seed": ("seed", _seed),
    "trials": ("trials", _pos_int("--trials", 1)),
    "lambda": ("lam", str),
    "bound": ("bound", _pos_int("--bound", 0)),
    "workers": ("workers", _pos_int("--workers", 1)),
    "out": ("out", _choice("--out", ("json", "csv", "table"))),
    "case": ("case", _choice("--case", ("A", "B"))),
    "parity": ("parity", _choice("--parity", ("even", "odd", "any"))),
    "plot": ("plot", str),
}


def read_config_file(path):
    """Flat ``key = value`` lines (``#`` comments); keys are flag names without dashes."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    out = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key = key.strip().lstrip("-").replace("_", "-")
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}; valid keys: {', '.join(sorted(KEYS))}")
        out[key] = value.strip()
    return out


def build_config(settings):
    """``settings`` maps flag names to raw strings; later sources already override earlier ones."""
    values = {}
    for key, raw in settings.items():
        if raw is None:
            continue
        field_name, parse = KEYS[key]
        values[field_name] = parse(str(raw))
    if "p" in values:
        p, d = values["p"], values.get("d")
        if not _is_prime(p):
            base, k = _split_prime_power(p)
            if d is not None and d != k:
                raise ConfigError(f"--q {p} = {base}^{k} conflicts with --ext-degree {d}")
            values["p"], values["d"] = base, k
    return RunConfig(**values)


def config_from_args(args):
    settings = {}
    if args.config:
        settings.update(read_config_file(args.config))
    for key in KEYS:
        v = getattr(args, key.replace("-", "_"), None)
        if v is not None:
            settings[key] = v
    return build_config(settings)


# ---------------------------------------------------------------------------
# trials


def _timed(fn, *a, **k):
    t0 = time.perf_counter()
    v = fn(*a, **k)
    return v, round(time.perf_counter() - t0, 6)


def _trial_invariants(cfg, place, rng, trial):
    lf = LocalField(place)
    n = place.n
    z = tuple(lf.random(rng, val=0, length=3, unit=True) for _ in range(n - 1))
    a = tuple(lf.random(rng) for _ in range(n - 1))
    a1 = tuple(lf.random(rng) for _ in range(n - 1))
    b = tuple(lf.random(rng) for _ in range(n - 1))
    b0 = lf.random(rng)
    a2 = tuple(x - y for x, y in zip(a, a1))
    m = companion_section(z, a)
    ok_m = tuple(m.x_at(i).trace() for i in range(1, n)) == a
    ok_mh = hinvariants(section_MH(z, a1, a2)) == (z, a1, a2)
    inv = deformed_invariants(deformed_section(z, a, b, b0), place)
    ok_d = inv.z == z and inv.a == a and inv.b == b and inv.b0 == b0
    tw = random_twisted(place, rng, srs=False)
    ok_tw = deformed_invariants(deformed_section(tw.z, tw.a, tw.b, tw.b0), place).same_coordinates(tw)
    ok = ok_m and ok_mh and ok_d and ok_tw
    return [{"kind": "invariants", "trial": trial, "section_M": ok_m, "section_MH": ok_mh,
             "section_deformed": ok_d, "twisted_roundtrip": ok_tw, "verdict": "ok" if ok else "failed"}]


def _trial_match(cfg, place, rng, trial):
    a = random_twisted(place, rng, disc_parity=cfg.parity_value() if place.inert else None)
    rec = {"kind": "match", "trial": trial, **match_record(a)}
    ok = True
    if place.inert:
        s = solve_cocycle(a, "symmetric")
        ok = check_cocycle(s)
        try:
            h = solve_cocycle(a, "unitary")
            ok = ok and check_cocycle(h) and h.det_valuation() % 2 == a.val_disc() % 2
            rec["val_det_h"] = h.det_valuation()
        except NoSolution:
            ok = False
        if place.n == 2:
            nonempty = bool(_enumerate_side(a, "unitary", bound=cfg.bound))
            rec["unitary_nonempty"] = nonempty
            ok = ok and nonempty == (rec["obstruction"] == "trivial")
    rec["verdict"] = "consistent" if ok else "inconsistent"
    return [rec]


def _trial_fiber(cfg, place, rng, trial):
    a = random_fl_point(place, rng, cfg.coweight(), parity=cfg.parity_value() if place.inert else None)
    lam = None
    out = []
    summary = {"kind": "fiber_summary", "trial": trial, "a_digest": point_digest(a), "val_disc": a.val_disc()}
    try:
        for side in ("symmetric", "unitary"):
            pr = FiberProblem.build(a, side)
            lam = pr.boundary()
            pts, dt = _timed(_enumerate_side, a, side, cfg.bound, True, pr)
            for k, fp in enumerate(pts):
                w = ic_weight(fp, lam, place.q)
                out.append({"kind": "fiber_point", "trial": trial, "side": side, "index": k,
                            **fp.to_json(w, place.inert)})
            summary[f"size_{side}"] = len(pts)
            summary[f"count_{side}"] = str(weighted_count(a, lam, side, place.q, points=pts, problem=pr))
            summary.setdefault("timings", {})[side] = dt
        summary["boundary"] = lam.to_json()
        summary["bound"] = cfg.bound if cfg.bound is not None else fiber_bounds(a)
        summary["verdict"] = "stable"
    except Unstable as exc:
        summary["verdict"] = "unstable"
        summary["error"] = str(exc)
    out.append(summary)
    return out


def _srs_sample(sampler, place, rng, **kw):
    for _ in range(200):
        A = sampler(place, rng, **kw)
        if is_srs_element(A):
            return A
    raise ConstraintUnsatisfiable("no strongly regular semisimple sample within the retry budget")


def _trial_oi(cfg, place, rng, trial):
    if place.n != 2:
        raise ConfigError("oi compares both groups and needs --n 2 (the unitary coset sum is rank 2 only)")
    out = []
    for group, sampler in (("S_n", random_symmetric_element), ("G'", random_unitary_element)):
        A = _srs_sample(sampler, place, rng, spread=2)
        try:
            rec, dt = _timed(oi_double_path, A, group)
            rec["timings"] = {"total": dt}
        except Unstable as exc:
            rec = {"kind": "oi_report", "group": group, "verdict": "unstable", "error": str(exc)}
        out.append({"trial": trial, **rec})
    return out


def _trial_fl(cfg, place, rng, trial):
    lam = cfg.coweight()
    parity = cfg.parity_value() if place.inert else None
    a = random_fl_point(place, rng, lam, parity=parity)
    try:
        rep = fl_check(a, lam)
        rec = rep.to_json()
    except Unstable as exc:
        rec = {"kind": "fl_report", "a_digest": point_digest(a), "verdict": "unstable", "error": str(exc)}
    return [{"trial": trial, "val_disc": a.val_disc(), **rec}]


def _trial_feq(cfg, place, rng, trial):
    if not place.inert:
        raise ConfigError("feq is stated at inert places; use --place inert")
    lam = cfg.coweight()
    parity = {"even": 0, "odd": 1, "any": None}[cfg.parity]
    a = random_fl_point(place, rng, lam, parity=parity)
    ok = functional_equation_check(a, "satake", lam)
    return [{"kind": "feq", "trial": trial, "a_digest": point_digest(a), "val_disc": a.val_disc(),
             "lambda": lam.adjoint().to_json(), "verdict": "holds" if ok else "fails"}]


TRIALS = {
    "invariants": _trial_invariants,
    "match": _trial_match,
    "fiber": _trial_fiber,
    "oi": _trial_oi,
    "fl-check": _trial_fl,
    "feq": _trial_feq,
}


def run_trial(name, cfg, trial):
    """Records of one trial; a pure function of ``(name, cfg, trial)``."""
    place = cfg.place_data()
    rng = CounterRNG(cfg.seed, trial)
    return TRIALS[name](cfg, place, rng, trial)


def _job(args):
    return run_trial(*args)


def run_trials(name, cfg):
    jobs = [(name, cfg, t) for t in range(cfg.trials)]
    if cfg.workers <= 1:
        batches = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            batches = list(pool.map(_job, jobs))
    return [r for batch in batches for r in batch]


# ---------------------------------------------------------------------------
# non-random subcommands


def _casecheck(cfg):
    n = cfg.n
    q = cfg.place_data().p
    recs = []
    if cfg.case == "A":
        configs = [()] if n == 3 else [((e, f),) for e in range(3) for f in range(3) if e + f <= 2]
        if n < 3:
            raise ConfigError("Case A needs --n 3 or larger")
        for pairs in configs:
            a, expected = case_a_scenario(n, q, pairs)
            recs.append(_case_record("A", n, q, pairs, None, a, expected))
    else:
        lam = None if cfg.lam is None else cfg.coweight()
        if n == 2:
            configs = [((e, f),) for e in range(2) for f in range(2)]
        elif n == 3:
            configs = [()] + [((e, f),) for e in range(2) for f in range(2)]
        else:
            configs = [()]
        for pairs in configs:
            a, expected = case_b_scenario(n, q, pairs, lam)
            recs.append(_case_record("B", n, q, pairs, lam, a, expected))
    return recs


def _case_record(case, n, q, pairs, lam, a, expected):
    # the scenarios predict plain point counts
    rep = fl_check(a, lam, mode="indicator")
    lhs, rhs = Fraction(rep.lhs), Fraction(rep.rhs)
    ok = lhs == rhs == expected
    return {"kind": "casecheck", "case": case, "n": n, "q": q, "pairs": [list(p) for p in pairs],
            "lambda": rep.lam.to_json(), "val_disc": a.val_disc(), "expected": expected,
            "observed_symmetric": str(lhs), "observed_unitary": str(rhs),
            "verdict": "equal" if ok else "unequal",
            "timings": {k: round(v, 6) for k, v in rep.timings.items()}}


def kostka_csv(size):
    """``lambda,mu,coefficients`` rows for all partitions ``mu <= lambda`` of ``size``."""
    parts = list(partitions(size))
    lines = ["lambda,mu,coefficients"]
    for lam in parts:
        for mu in parts:
            lp = Coweight(lam + (0,) * (size - len(lam)))
            mp = Coweight(mu + (0,) * (size - len(mu)))
            coeffs = kostka_foulkes(lp, mp)
            if coeffs == (0,):
                continue
            lines.append(f"{' '.join(map(str, lam))},{' '.join(map(str, mu))},{' '.join(map(str, coeffs))}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# self test


def _kostka_identities():
    two, eleven = Coweight((2, 0)), Coweight((1, 1))
    ok = kostka_foulkes(two, eleven) == (0, 1)
    for size in range(1, 6):
        for lam in partitions(size):
            lp = Coweight(lam + (0,) * (size - len(lam)))
            ok = ok and kostka_foulkes(lp, lp) == (1,)
    ok = ok and satake_value(Coweight((1, -1)), Coweight((0, 0)), 5) == Fraction(1, 5)
    return ok


def _selftest(cfg):
    place = cfg.place_data()
    checks = [("invariants", cfg), ("match", cfg), ("fl-check", replace(cfg, lam=None, parity="even"))]
    if place.n == 2:
        checks.append(("fl-check", replace(cfg, lam="1,-1", parity="even")))
        checks.append(("oi", replace(cfg, trials=max(1, cfg.trials // 4))))
    else:
        checks = [(k, replace(c, trials=max(1, cfg.trials // 5))) for k, c in checks]
    if place.inert:
        checks.append(("fl-check", replace(cfg, lam=None, parity="odd", trials=max(1, cfg.trials // 4))))
        checks.append(("feq", replace(cfg, lam=None, parity="any", trials=max(1, cfg.trials // 4))))
    rows, records = [], []
    for name, c in checks:
        t0 = time.perf_counter()
        recs = run_trials(name, c)
        tagged = [r for r in recs if "verdict" in r]
        bad = sum(r["verdict"] not in OK_VERDICTS for r in tagged)
        label = name if c.lam is None else f"{name} lambda={c.lam}"
        if name in ("fl-check", "match", "feq") and c.parity != "even":
            label += f" parity={c.parity}"
        rows.append({"kind": "selftest", "check": label, "trials": c.trials, "passed": len(tagged) - bad,
                     "failed": bad, "verdict": "ok" if bad == 0 else "failed",
                     "elapsed": round(time.perf_counter() - t0, 3)})
        records.extend(recs)
    ok = _kostka_identities()
    rows.append({"kind": "selftest", "check": "kostka identities", "trials": 1, "passed": int(ok),
                 "failed": int(not ok), "verdict": "ok" if ok else "failed", "elapsed": 0.0})
    return rows, records


# ---------------------------------------------------------------------------
# dispatch


def _header(name, cfg):
    return {"kind": "header", "schema": SCHEMA, "version": __version__, "subcommand": name,
            "config": {k: v for k, v in asdict(cfg).items()}}


def _summary(name, records, header):
    counts = {}
    for r in records:
        if "verdict" in r:
            counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    return {"kind": "summary", "subcommand": name, "records": len(records), "verdicts": counts,
            "report_digest": report_digest([header, *records])}


def run_subcommand(name, config, stream=None):
    """Run ``name`` under ``config``, write the report to ``stream``; return the exit status."""
    stream = stream or sys.stdout
    if name not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {name!r}; choose from {', '.join(SUBCOMMANDS)}")
    if name == "kostka":
        stream.write(kostka_csv(config.n))
        return 0
    if name in TRIALS:
        config.place_data()
        config.coweight()
        records = run_trials(name, config)
    elif name == "casecheck":
        records = _casecheck(config)
    else:
        rows, details = _selftest(config)
        records = rows
    header = _header(name, config)
    summary = _summary(name, records, header)
    if name == "selftest":
        summary["report_digest"] = report_digest([header, *rows, *details])
    fmt = config.out or ("table" if name == "selftest" else "json")
    stream.write(render(header, records, summary, fmt))
    if fmt == "table" and name == "selftest":
        stream.write(f"# overall: {'ok' if all(r['verdict'] == 'ok' for r in records) else 'failed'}\n")
    if config.plot:
        render_png(records, config.plot, title=name)
    bad = [r for r in records if "verdict" in r and r["verdict"] not in OK_VERDICTS]
    return 1 if bad else 0


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", help="residue field size: a prime p, or a power p^d")
    common.add_argument("--ext-degree", dest="ext_degree", help="degree d of F_q over F_p (default 1)")
    common.add_argument("--n", help="rank n")
    common.add_argument("--place", help="split or inert")
    common.add_argument("--prec", help="working precision for truncated series")
    common.add_argument("--seed", help="64-bit seed")
    common.add_argument("--trials", help="number of trials")
    common.add_argument("--lambda", dest="lambda", help="coweight, e.g. 1,-1")
    common.add_argument("--bound", help="fiber / coset search bound (certified at bound+1)")
    common.add_argument("--workers", help="worker processes")
    common.add_argument("--out", help="json, csv or table")
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--case", help="casecheck scenario: A or B")
    common.add_argument("--parity", help="val Disc parity of sampled points: even, odd or any")
    common.add_argument("--plot", help="also write a PNG summary to this path")
    p = argparse.ArgumentParser(prog="jrfl", description="Exact checks of the Jacquet-Rallis fundamental lemma over F_q((pi)).")
    p.add_argument("--version", action="version", version=f"jrfl {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run_subcommand(args.command, cfg)
    except ConfigError as exc:
        print(f"jrfl: configuration error: {exc}", file=sys.stderr)
        return 2
    except JRFLError as exc:
        print(f"jrfl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
