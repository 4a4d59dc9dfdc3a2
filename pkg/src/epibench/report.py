"""Execution of a :class:`RunConfig` into a JSON report or a CSV sweep."""
from __future__ import annotations

import csv
import json
import math
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
import scipy

from . import __version__
from . import identities as ids
from . import inequalities as ineq
from .density import ChannelPoint, ResolutionError, ScoreUndefinedError
from .functionals import entropy, mmse_signal
from .oracles import McConfig, UnsupportedError, in_band, mc_entropy, mc_mmse

SCHEMA_VERSION = "1.0"
CSV_HEADER = ("check", "family_x", "family_y", "lambda", "t", "value", "tol", "status")
STATUSES = ("pass", "fail", "inconclusive", "error")
# failures of these kinds become per-check error entries instead of aborting the run
_RECOVERABLE = (ScoreUndefinedError, ResolutionError, UnsupportedError, ValueError)


def _plain(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def _entry(check, dx, dy, lam, t, value, tol, status, detail=None, message=""):
    return {"check": check, "family_x": dx, "family_y": dy, "lambda": lam, "t": t,
            "value": value, "tol": tol, "status": status, "detail": detail or {},
            "message": message}


def _sort_key(e):
    def num(v):
        return (0, 0.0) if v is None else (1, v)
    return (e["check"], e["family_x"], e["family_y"], num(e["lambda"]), num(e["t"]))


# ------------------------------------------------------------------ work items
def _residual(check, d, t, res):
    return [_entry(check, d.name, "", None, t, res.residual, res.tol, res.status, res.method)]


def _slack(check, dx, dy, rep):
    lam = rep.point.lam if rep.point is not None else None
    t = rep.point.t if rep.point is not None else None
    return _entry(check, dx.name, dy.name, lam, t, rep.slack, rep.tol, rep.status, rep.detail)


def _single_items(cfg, d):
    pol, tol = cfg.grid_policy, cfg.tol
    law = d.law
    items = []
    for t in cfg.t_grid:
        items += [
            ("complementary", d, None, None, t,
             lambda t=t: _residual("complementary", d, t,
                                   ids.complementary_general(law, t, tol("complementary"), pol))),
            ("debruijn", d, None, None, t,
             lambda t=t: _residual("debruijn", d, t, ids.debruijn_direct(law, t, 1.0, tol("debruijn"), pol))),
            ("gvs", d, None, None, t,
             lambda t=t: _residual("gvs", d, t, ids.gvs_identity(law, t, tol("gvs"), pol))),
            ("mi_identity", d, None, None, t,
             lambda t=t: _residual("mi_identity", d, t, ids.mi_identity(law, t, tol("mi_identity"), pol))),
        ]
    items += [
        ("fi_representation", d, None, None, None,
         lambda: _residual("fi_representation", d, None,
                           ids.fi_representation(law, None, tol=tol("fi_representation"), policy=pol))),
        ("mmse_representation", d, None, None, None,
         lambda: _residual("mmse_representation", d, None,
                           ids.mmse_representation(law, None, tol=tol("mmse_representation"), policy=pol))),
        ("deficit_coincidence", d, None, None, None,
         lambda: _residual("deficit_coincidence", d, None,
                           ids.deficit_coincidence(law, tol("deficit_coincidence"), pol))),
        ("mc_entropy", d, None, None, None, lambda: _mc(cfg, d, "mc_entropy", None)),
    ]
    items += [("mc_mmse", d, None, None, t, lambda t=t: _mc(cfg, d, "mc_mmse", t)) for t in cfg.t_grid]
    return items


def _mc(cfg, d, check, t):
    if d.smoothing:
        raise UnsupportedError("Monte Carlo cross-checks need an unsmoothed family")
    c = McConfig(cfg.mc_samples, cfg.seed)
    k = cfg.tol(check)
    if check == "mc_entropy":
        est, se = mc_entropy(d.density, c)
        quad = entropy(d.law, cfg.grid_policy)
    else:
        est, se = mc_mmse(d.density, t, c, policy=cfg.grid_policy)
        quad = mmse_signal(d.law, t, cfg.grid_policy)
    band = max(k * se, 1e-12)
    status = "pass" if in_band(quad, est, se, k) else "fail"
    return [_entry(check, d.name, "", None, t, quad - est, band, status,
                   {"quadrature": quad, "estimate": est, "std_error": se, "n_samples": c.n_samples,
                    "seed": c.seed})]


def _deficit_f(cfg, dx, dy, lam):
    tol_mono = cfg.tol("deficit_f")
    ts = [0.0, *cfg.t_grid]
    vals = ineq.deficit_f(dx.law, dy.law, lam, ts, tol_mono, cfg.grid_policy, strict=False)
    rows, prev = [], None
    for t, f in vals:
        ok = abs(f) <= 1e-8 if prev is None else f <= prev + tol_mono
        rows.append(_entry("deficit_f", dx.name, dy.name, lam, t, f, 1e-8 if prev is None else tol_mono,
                           "pass" if ok else "fail", {"previous": prev}))
        prev = f
    return rows


def _pair_items(cfg, dx, dy):
    pol, tol = cfg.grid_policy, cfg.tol
    p, q = dx.law, dy.law

    def one(check, fn):
        return lambda: [_slack(check, dx, dy, fn())]

    items = [("epi", dx, dy, None, None, one("epi", lambda: ineq.epi_slack(p, q, tol("epi"), policy=pol))),
             ("fii", dx, dy, None, None, one("fii", lambda: ineq.fii_slack(p, q, tol("fii"), pol)))]
    for lam in cfg.lambda_grid:
        items += [
            ("epi_concave", dx, dy, lam, None,
             one("epi_concave", lambda lam=lam: ineq.epi_concave_slack(p, q, lam, tol("epi_concave"), pol))),
            ("fii_weighted", dx, dy, lam, None,
             one("fii_weighted", lambda lam=lam: ineq.fii_weighted_slack(p, q, lam, tol("fii_weighted"), pol))),
            ("deficit_f", dx, dy, lam, None, lambda lam=lam: _deficit_f(cfg, dx, dy, lam)),
            ("epi_limit", dx, dy, lam, None,
             lambda lam=lam: [_slack("epi_limit", dx, dy, r) for r in
                              ineq.epi_limit_recovery(p, q, lam, cfg.t_grid, tol("epi_limit"), pol)]),
        ]
        for t in cfg.t_grid:
            pt = ChannelPoint(lam, t)
            items += [
                ("theorem1", dx, dy, lam, t,
                 one("theorem1", lambda pt=pt: ineq.theorem1_slack(p, q, pt, tol("theorem1"), pol))),
                ("mmse_ineq", dx, dy, lam, t,
                 one("mmse_ineq", lambda pt=pt: ineq.mmse_ineq_slack(p, q, pt, tol("mmse_ineq"), pol))),
                ("dj_ineq", dx, dy, lam, t,
                 one("dj_ineq", lambda pt=pt: ineq.dj_ineq_slack(p, q, pt, tol("dj_ineq"), pol))),
                ("jk_equivalence", dx, dy, lam, t,
                 one("jk_equivalence", lambda pt=pt: ineq.jk_equivalence(p, q, pt, tol("jk_equivalence"), pol))),
            ]
    return items


def work_items(cfg):
    items = []
    for d in cfg.distributions:
        items += _single_items(cfg, d)
    for dx, dy in combinations_with_replacement(cfg.distributions, 2):
        items += _pair_items(cfg, dx, dy)
    return [it for it in items if it[0] in cfg.checks]


def _execute(item):
    check, dx, dy, lam, t, fn = item
    try:
        return fn()
    except _RECOVERABLE as exc:
        return [_entry(check, dx.name, dy.name if dy else "", lam, t, None, None, "error",
                       message=f"{type(exc).__name__}: {exc}")]


# ------------------------------------------------------------------ report
@dataclass
class Report:
    config: dict
    entries: list
    summary: dict
    versions: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    @property
    def failed(self):
        return self.summary.get("fail", 0) > 0

    def to_dict(self):
        return {"schema_version": self.schema_version, "versions": self.versions,
                "config": self.config, "summary": self.summary, "entries": self.entries}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d):
        return cls(config=d["config"], entries=d["entries"], summary=d["summary"],
                   versions=d.get("versions", {}), schema_version=d["schema_version"])

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def summarize(entries):
    counts = {s: 0 for s in STATUSES}
    for e in entries:
        counts[e["status"]] += 1
    counts["total"] = len(entries)
    return counts


def run(cfg, threads=1):
    """Execute every selected check and assemble a deterministic :class:`Report`."""
    items = work_items(cfg)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            chunks = list(ex.map(_execute, items))
    else:
        chunks = [_execute(it) for it in items]
    entries = sorted((_plain(e) for chunk in chunks for e in chunk), key=_sort_key)
    versions = {"epibench": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                "python": platform.python_version()}
    return Report(_plain(cfg.to_dict()), entries, summarize(entries), versions)


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def sweep(cfg, path, threads=1):
    """Write one CSV row per check evaluation; returns the report it came from."""
    report = run(cfg, threads)
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write sweep to {path}: {exc.strerror}") from None
    with fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for e in report.entries:
            w.writerow([_csv_cell(e[k]) for k in ("check", "family_x", "family_y", "lambda", "t",
                                                   "value", "tol", "status")])
    return report
