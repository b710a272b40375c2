"""Ensemble statistics, scaling-collapse scoring, and result files.

Averaging follows the two-stage convention: time-average each trajectory
over its measured window first, then take mean and standard error across
trajectories.  No autocorrelation correction is applied to the standard
error; measurements within a trajectory are treated as one number.
"""

import json
import os
import tempfile
from dataclasses import asdict, dataclass

import numpy as np

from . import game
from .errors import ConfigError, EmptyInput, InsufficientOverlap, IoError

CSV_COLUMNS = ("model", "L", "p", "n", "bond", "mean", "stderr", "count", "seed")


@dataclass(frozen=True)
class EnsembleStat:
    model: str
    L: int
    p: float
    n: object          # entropy order, int or float
    bond: int
    mean: float
    stderr: float
    count: int
    seed: int


def _stat_key(s):
    return (s.model, s.L, s.p, float(s.n), s.bond, s.seed)


def aggregate(results, cfg):
    """Reduce a trajectory stream to one EnsembleStat per (order, bond)."""
    cfg = game.validate_config(cfg)
    per_traj = {}
    count = 0
    for tr in sorted(results, key=lambda t: t.index):
        if tr.times.size == 0:
            continue
        count += 1
        for n, series in tr.entropies.items():
            if tr.profiles is not None:
                prof = tr.profiles[n]
                for b in range(1, cfg.L):
                    per_traj.setdefault((n, b), []).append(float(prof[:, b - 1].mean()))
            else:
                per_traj.setdefault((n, cfg.L // 2), []).append(float(series.mean()))
    if count == 0:
        raise EmptyInput("no measured trajectories to aggregate")
    out = []
    for (n, bond), vals in per_traj.items():
        a = np.asarray(vals)
        err = float(a.std(ddof=1) / np.sqrt(a.size)) if a.size > 1 else 0.0
        out.append(EnsembleStat(model=cfg.model, L=cfg.L, p=cfg.p, n=n,
                                bond=bond, mean=float(a.mean()), stderr=err,
                                count=int(a.size), seed=cfg.seed))
    out.sort(key=_stat_key)
    return out


def collapse_score(curves, p_c, nu, sigma):
    """Mean squared off-curve residual of the rescaled data.

    curves maps system size L to a sequence of (p, value) points on an
    increasing p grid.  Each size's points are scored against the piecewise
    linear interpolation through every other size's points, restricted to
    the x-range those other points span; summing over all sizes makes the
    score independent of which curve is called the reference.
    """
    if not float(nu) > 0:
        raise ConfigError("nu=%r must be positive" % (nu,))
    sets = []
    for L in sorted(curves):
        pts = list(curves[L])
        if not pts:
            continue
        ps = np.asarray([float(p) for p, _ in pts])
        vs = np.asarray([float(v) for _, v in pts])
        if np.any(np.diff(ps) <= 0):
            raise ConfigError("p grid for L=%d is not strictly increasing" % L)
        x = (ps - float(p_c)) * float(L) ** (1.0 / float(nu))
        y = vs / float(L) ** float(sigma)
        sets.append((x, y))
    if len(sets) < 2:
        raise InsufficientOverlap("need curves for at least two system sizes")
    total = 0.0
    npts = 0
    for i, (xi, yi) in enumerate(sets):
        xo = np.concatenate([sets[j][0] for j in range(len(sets)) if j != i])
        yo = np.concatenate([sets[j][1] for j in range(len(sets)) if j != i])
        order = np.argsort(xo, kind="stable")
        xo = xo[order]
        yo = yo[order]
        mask = (xi >= xo[0]) & (xi <= xo[-1])
        if not mask.any():
            continue
        resid = yi[mask] - np.interp(xi[mask], xo, yo)
        total += float(np.dot(resid, resid))
        npts += int(mask.sum())
    if npts == 0:
        raise InsufficientOverlap("rescaled x-ranges do not overlap")
    return total / npts


def scan_collapse(curves, p_c, nu_grid, sigma):
    """(best nu, score) over a grid; ties keep the earliest grid point."""
    best = None
    for nu in nu_grid:
        s = collapse_score(curves, p_c, nu, sigma)
        if best is None or s < best[1]:
            best = (float(nu), s)
    if best is None:
        raise ConfigError("empty nu grid")
    return best


# -- files -------------------------------------------------------------------

def _g17(x):
    return "%.17g" % float(x)


def _fmt_n(n):
    return str(n) if isinstance(n, int) else _g17(n)


def _jdump(v, indent):
    # the stdlib encoder hardwires float.__repr__, so the 17-digit float
    # form needs a hand-rolled walk; everything else defers to json.dumps
    pad = " " * indent
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return json.dumps(v)
    if isinstance(v, float):
        if not np.isfinite(v):
            raise ConfigError("non-finite value %r in export" % (v,))
        return _g17(v)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = ("%s %s: %s" % (pad, json.dumps(str(k)), _jdump(u, indent + 1))
                 for k, u in v.items())
        return "{\n" + ",\n".join(items) + "\n" + pad[:-1] + "}"
    if isinstance(v, (list, tuple)):
        if not len(v):
            return "[]"
        items = ("%s%s" % (pad, _jdump(u, indent + 1)) for u in v)
        return "[\n" + ",\n".join(items) + "\n" + pad[:-1] + "]"
    raise ConfigError("cannot serialize %r" % (type(v),))


def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".mgarena-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as e:
        raise IoError("cannot write %s: %s" % (path, e))


def csv_text(stats):
    lines = [",".join(CSV_COLUMNS)]
    for s in sorted(stats, key=_stat_key):
        lines.append(",".join((s.model, str(s.L), _g17(s.p), _fmt_n(s.n),
                               str(s.bond), _g17(s.mean), _g17(s.stderr),
                               str(s.count), str(s.seed))))
    return "\n".join(lines) + "\n"


def json_text(stats, configs=()):
    rows = [{k: getattr(s, k) for k in CSV_COLUMNS}
            for s in sorted(stats, key=_stat_key)]
    doc = {"configs": [asdict(c) for c in configs], "stats": rows}
    return _jdump(doc, 1) + "\n"


def export(stats, path, fmt="csv", configs=()):
    """Write stats to path; `fmt` is csv or json; the write is atomic."""
    if fmt == "csv":
        _atomic_write(path, csv_text(stats))
    elif fmt == "json":
        _atomic_write(path, json_text(stats, configs))
    else:
        raise ConfigError("unknown format %r (csv or json)" % (fmt,))
