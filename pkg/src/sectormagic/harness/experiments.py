"""Experiment drivers.

Reproducibility contract: every Monte Carlo task (sample index or disorder
realization) owns a hash-derived generator keyed by (master seed,
experiment id, task index), tasks are dispatched in fixed chunks of CHUNK,
and reduction walks the results in task order.  Records and summaries are
therefore byte-identical for any worker count, and any sub-range of tasks
can be recomputed in isolation.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import scipy.stats

from ..sectors import Direction, enumerate_sector, sector_dimension
from ..moments import (
    haar_mean_sp2,
    m2_mean_bound,
    mean_sp2,
    mean_sp2_tilted,
    pe_moment_mean,
    pe_shannon_mean,
    porter_thomas_cdf,
    variance_sp2,
)
from ..asymptotics import XI_HESSIAN, asymptotic_prediction, nearest_sector_charge
from ..sampler import SeedPolicy, constrained_haar_state
from ..magic import pauli_spectrum, shannon_pe
from ..hamiltonians import (
    NumericalContractError,
    adjacent_gap_ratio,
    build_csyk,
    build_mfim,
    build_xxz_nnn,
    diagonalize,
    embed_eigenvector,
    extract_sector_block,
    midspectrum_filter,
)
from .config import ConfigError
from .records import RunRecord
from .stats import SummaryStats

__all__ = [
    "resolve_threads",
    "run_ensemble_experiment",
    "run_variance_convergence",
    "run_disorder_sweep",
    "run_mixed_charge",
    "run_asymptotic_collapse",
    "run_self_averaging",
    "run_pe_check",
]

#: tasks per dispatch unit; fixed so chunk boundaries (and hence all
#: floating-point reduction orders) never depend on the worker count
CHUNK = 64

_L_CAP_DEFAULT = 12
_L_CAP_LARGE = 14
_SECTOR_DIM_CAP = 4000


def resolve_threads(flag: int | None = None) -> int:
    """Worker count: explicit flag > SECTORMAGIC_THREADS > cpu count."""
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get("SECTORMAGIC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SECTORMAGIC_THREADS is not an integer: {env!r}")
    return os.cpu_count() or 1


def _budget_check(L: int, qs=(), allow_large: bool = False):
    cap = _L_CAP_LARGE if allow_large else _L_CAP_DEFAULT
    if L > cap:
        raise ConfigError(
            f"L={L} exceeds the sampling cap {cap}"
            + ("" if allow_large else " (pass allow_large to go to 14)"))
    for q in qs:
        d = sector_dimension(L, q)
        if d == 0:
            raise ConfigError(f"sector (L={L}, q={q}) is empty")
        if d > _SECTOR_DIM_CAP:
            raise ConfigError(
                f"sector (L={L}, q={q}) has dimension {d} > {_SECTOR_DIM_CAP}")


def _parallel_chunks(worker, arglist, threads: int):
    """Run worker over arglist, preserving order; forks only when useful."""
    if threads <= 1 or len(arglist) <= 1:
        return [worker(a) for a in arglist]
    ctx = multiprocessing.get_context("fork")
    n = min(threads, len(arglist))
    with ProcessPoolExecutor(max_workers=n, mp_context=ctx) as pool:
        return list(pool.map(worker, arglist))


def _chunk_ranges(n: int):
    return [(lo, min(lo + CHUNK, n)) for lo in range(0, n, CHUNK)]


def _frame_from_spec(spec):
    if isinstance(spec, str):
        return spec
    theta, phi = spec
    return Direction.from_angles(theta, phi)


def _frame_tag(spec) -> str:
    if isinstance(spec, str):
        return spec
    return "t%.12g:p%.12g" % tuple(spec)


# ---------------------------------------------------------------------------
# constrained-ensemble sampling
# ---------------------------------------------------------------------------

def _sample_chunk(args):
    """One chunk of Haar-sector samples: per-task (xi2, m2, s2, shannon)
    plus a pooled |<P>|^2 histogram."""
    master, exp_id, L, q, frame_spec, lo, hi, hist_bins = args
    policy = SeedPolicy(master)
    frame = _frame_from_spec(frame_spec)
    vals = np.empty((hi - lo, 4))
    hist = np.zeros(hist_bins, dtype=np.int64) if hist_bins else None
    for i in range(lo, hi):
        state = constrained_haar_state(L, q, frame=frame,
                                       seed=policy.stream(exp_id, i))
        summ = pauli_spectrum(state, (2.0,),
                              histogram_bins=hist_bins if hist_bins else None)
        xi2 = summ.purity(2.0)
        p = np.abs(state) ** 2
        ipr2 = float(p @ p)
        vals[i - lo] = (xi2, -math.log2(xi2), -math.log2(ipr2),
                        shannon_pe(state))
        if hist is not None:
            hist += summ.histogram[0]
    return vals, hist


_SAMPLE_OBS = ("xi2", "m2", "s2", "shannon_pe")


def run_ensemble_experiment(L, qs, samples, frame="z", seed=0, threads=None,
                            histogram_bins=200, allow_large=False):
    """Sample the charge-constrained Haar ensemble and stream stabilizer
    purity / entropy and participation entropies per sample, with the exact
    ensemble moments attached for comparison."""
    qs = list(qs)
    _budget_check(L, qs, allow_large)
    threads = resolve_threads(threads)
    tag = _frame_tag(frame)

    records = []
    sectors = {}
    for q in qs:
        exp_id = f"sample:L={L}:q={q}:frame={tag}"
        args = [(seed, exp_id, L, q, frame, lo, hi, histogram_bins)
                for lo, hi in _chunk_ranges(samples)]
        results = _parallel_chunks(_sample_chunk, args, threads)

        stats = {obs: SummaryStats() for obs in _SAMPLE_OBS}
        hist = np.zeros(histogram_bins, dtype=np.int64) if histogram_bins else None
        task = 0
        for vals, h in results:
            for row in vals:
                for obs, value in zip(_SAMPLE_OBS, row):
                    records.append(RunRecord("sample", seed, task, L, q, obs,
                                             float(value)))
                    stats[obs].update(float(value))
                task += 1
            if hist is not None:
                hist += h

        d = sector_dimension(L, q)
        sector = {
            "dimension": d,
            "observed": {obs: st.to_dict() for obs, st in stats.items()},
            "analytic": {
                "mean_xi2": float(mean_sp2(L, q)),
                "variance_xi2": float(variance_sp2(L, q)),
                "m2_mean_bound": m2_mean_bound(L, q),
                "pe_moment_mean": float(pe_moment_mean(d, 2)),
                "pe_shannon_mean": pe_shannon_mean(d),
            },
        }
        if hist is not None:
            sector["histogram"] = {
                "bin_edges": np.linspace(0.0, 1.0, histogram_bins + 1).tolist(),
                "counts": hist.tolist(),
            }
        sectors[str(q)] = sector

    summary = {
        "experiment": "sample",
        "seed": seed,
        "L": L,
        "frame": tag,
        "samples": samples,
        "sectors": sectors,
    }
    return records, summary


def run_variance_convergence(L, qs, samples, seed=0, threads=None,
                             checkpoints=None, allow_large=False):
    """Running mean/variance of Xi_2 against the exact sector moments at
    logarithmic checkpoints."""
    qs = list(qs)
    _budget_check(L, qs, allow_large)
    threads = resolve_threads(threads)
    if not checkpoints:
        checkpoints = [c for c in (100, 300, 1000, 3000, 10000, 30000, 100000)
                       if c < samples]
    checkpoints = sorted(set(int(c) for c in checkpoints) | {samples})
    if any(c < 2 for c in checkpoints):
        raise ConfigError("checkpoints must be >= 2")

    records = []
    sectors = {}
    for q in qs:
        exp_id = f"varconv:L={L}:q={q}"
        args = [(seed, exp_id, L, q, "z", lo, hi, 0)
                for lo, hi in _chunk_ranges(samples)]
        results = _parallel_chunks(_sample_chunk, args, threads)

        exact_mean = float(mean_sp2(L, q))
        exact_var = float(variance_sp2(L, q))
        stats = SummaryStats()
        marks = set(checkpoints)
        rows = []
        for vals, _ in results:
            for row in vals:
                stats.update(float(row[0]))
                if stats.count in marks:
                    rows.append({
                        "count": stats.count,
                        "mean": stats.mean,
                        "variance": stats.variance,
                        "mean_z": (stats.mean - exact_mean) / stats.sem,
                        "variance_ratio": stats.variance / exact_var,
                    })
        for ck in rows:
            records.append(RunRecord("variance-convergence", seed,
                                     int(ck["count"]), L, q, "xi2",
                                     ck["mean"], aux1=ck["variance"],
                                     aux2=float(ck["count"])))
        sectors[str(q)] = {
            "dimension": sector_dimension(L, q),
            "exact_mean": exact_mean,
            "exact_variance": exact_var,
            "checkpoints": rows,
        }

    summary = {
        "experiment": "variance-convergence",
        "seed": seed,
        "L": L,
        "samples": samples,
        "sectors": sectors,
    }
    return records, summary


# ---------------------------------------------------------------------------
# tilted-frame sweep
# ---------------------------------------------------------------------------

def run_mixed_charge(L, q, thetas, samples, seed=0, phi=0.0, threads=None,
                     allow_large=False):
    """Constrain the charge along a tilted axis n(theta, phi) and compare the
    sampled mean Xi_2 against the extended-precision tilted prediction."""
    _budget_check(L, [q], allow_large)
    threads = resolve_threads(threads)
    thetas = [float(t) for t in thetas]

    records = []
    sweep = []
    task = 0
    for ti, theta in enumerate(thetas):
        exp_id = f"mixed:L={L}:q={q}:t={ti}"
        frame_spec = (theta, phi)
        args = [(seed, exp_id, L, q, frame_spec, lo, hi, 0)
                for lo, hi in _chunk_ranges(samples)]
        results = _parallel_chunks(_sample_chunk, args, threads)

        direction = Direction.from_angles(theta, phi)
        analytic = mean_sp2_tilted(L, q, direction)
        stats = SummaryStats()
        for vals, _ in results:
            for row in vals:
                records.append(RunRecord("mixed", seed, task, L, q, "xi2",
                                         float(row[0]), aux1=theta))
                records.append(RunRecord("mixed", seed, task, L, q, "m2",
                                         float(row[1]), aux1=theta))
                stats.update(float(row[0]))
                task += 1
        sweep.append({
            "theta": theta,
            "phi": phi,
            "analytic_mean_xi2": analytic,
            "observed": stats.to_dict(),
            "mean_z": (stats.mean - analytic) / stats.sem,
        })

    summary = {
        "experiment": "mixed",
        "seed": seed,
        "L": L,
        "q": q,
        "samples": samples,
        "sweep": sweep,
    }
    return records, summary


# ---------------------------------------------------------------------------
# disorder ensembles
# ---------------------------------------------------------------------------

_BUILDERS = {
    "csyk": lambda L, stream, p: build_csyk(L, seed=stream),
    "xxz": lambda L, stream, p: _xxz_disordered(L, stream, p),
    "mfim": lambda L, stream, p: build_mfim(L, **p),
}


def _xxz_disordered(L, stream, p):
    return build_xxz_nnn(L, **p)


def _disorder_chunk(args):
    """Chunk of disorder realizations: per realization and sector, the
    mid-spectrum eigenstate m2 values, energy densities and gap ratio."""
    (master, model, L, qs, params, lo, hi, window, fraction) = args
    policy = SeedPolicy(master)
    out = []
    for r in range(lo, hi):
        stream = policy.stream(f"{model}:L={L}", r)
        H = _BUILDERS[model](L, stream, dict(params))
        row = []
        for q in qs:
            if q is None:
                block = H.matrix
                basis = None
            else:
                block, basis = extract_sector_block(H, q)
            block_zero = not np.any(block)
            es = diagonalize(block)
            keep = midspectrum_filter(es.values, L, window=window,
                                      fraction=fraction)
            m2s = np.empty(keep.size)
            for n, k in enumerate(keep):
                v = es.vectors[:, k]
                psi = v if basis is None else embed_eigenvector(v, basis)
                xi2 = pauli_spectrum(psi, (2.0,)).purity(2.0)
                m2s[n] = -math.log2(xi2)
            row.append({
                "q": q,
                "dim": es.dimension,
                "m2": m2s,
                "e_density": es.values[keep] / L,
                "gap_ratio": adjacent_gap_ratio(es.values),
                "block_zero": block_zero,
            })
        out.append(row)
    return out


def run_disorder_sweep(model, L, qs=None, realizations=100, seed=0,
                       threads=None, window=None, fraction=None,
                       couplings=None):
    """Mid-spectrum stabilizer entropy across disorder realizations of one
    Hamiltonian family, pooled per charge sector.

    For sectorless models (mfim) pass qs=None to use the full spectrum.
    Exactly one of window / fraction selects the mid-spectrum band.
    """
    if model not in _BUILDERS:
        raise ConfigError(f"unknown model {model!r}")
    if (window is None) == (fraction is None):
        raise ConfigError("give exactly one of window / fraction")
    qs = [None] if qs is None else list(qs)
    if model == "mfim" and qs != [None]:
        raise ConfigError("mfim has no conserved charge; leave qs unset")
    threads = resolve_threads(threads)
    params = tuple(sorted((couplings or {}).items()))

    args = [(seed, model, L, tuple(qs), params, lo, hi, window, fraction)
            for lo, hi in _chunk_ranges(realizations)]
    results = _parallel_chunks(_disorder_chunk, args, threads)

    records = []
    pooled = {q: {"m2": SummaryStats(), "gap": SummaryStats(),
                  "zero": 0, "dim": None} for q in qs}
    task = 0
    r = 0
    for chunk in results:
        for row in chunk:
            for cell in row:
                q = cell["q"]
                agg = pooled[q]
                agg["dim"] = cell["dim"]
                agg["zero"] += bool(cell["block_zero"])
                if math.isfinite(cell["gap_ratio"]):
                    agg["gap"].update(cell["gap_ratio"])
                for m2, ed in zip(cell["m2"], cell["e_density"]):
                    records.append(RunRecord(model, seed, task, L, q, "m2",
                                             float(m2), aux1=float(r),
                                             aux2=float(ed)))
                    agg["m2"].update(float(m2))
                    task += 1
            r += 1

    full_bound = -math.log2(float(haar_mean_sp2(L)))
    sectors = {}
    for q in qs:
        agg = pooled[q]
        bound = full_bound if q is None else m2_mean_bound(L, q)
        stats = agg["m2"]
        sectors["all" if q is None else str(q)] = {
            "dimension": agg["dim"],
            "eigenstates": stats.count,
            "m2": stats.to_dict(),
            "m2_mean_bound": bound,
            "m2_deficit": None if stats.count == 0 else bound - stats.mean,
            "gap_ratio": agg["gap"].to_dict(),
            "degenerate": agg["zero"] == realizations and realizations > 0,
        }

    summary = {
        "experiment": model,
        "seed": seed,
        "L": L,
        "realizations": realizations,
        "window": window,
        "fraction": fraction,
        "couplings": dict(params),
        "sectors": sectors,
    }
    return records, summary


def _selfavg_chunk(args):
    """Per-realization mean mid-spectrum m2 in one charge sector."""
    master, model, L, q, params, lo, hi, fraction = args
    policy = SeedPolicy(master)
    means = np.empty(hi - lo)
    for r in range(lo, hi):
        stream = policy.stream(f"selfavg:{model}:L={L}", r)
        H = _BUILDERS[model](L, stream, dict(params))
        block, basis = extract_sector_block(H, q)
        es = diagonalize(block)
        keep = midspectrum_filter(es.values, L, fraction=fraction)
        acc = 0.0
        for k in keep:
            psi = embed_eigenvector(es.vectors[:, k], basis)
            acc += -math.log2(pauli_spectrum(psi, (2.0,)).purity(2.0))
        means[r - lo] = acc / keep.size
    return means


def run_self_averaging(model="csyk", Ls=(6, 8, 10), realizations=50, seed=0,
                       threads=None, fraction=0.1, couplings=None):
    """Relative disorder fluctuation of the mean mid-spectrum m2 per system
    size; self-averaging shows up as a decreasing sequence."""
    if model not in _BUILDERS:
        raise ConfigError(f"unknown model {model!r}")
    if model == "mfim":
        raise ConfigError("self-averaging driver needs a charge sector")
    threads = resolve_threads(threads)
    params = tuple(sorted((couplings or {}).items()))

    records = []
    sizes = []
    for L in Ls:
        q = 0  # half filling / zero magnetization
        args = [(seed, model, L, q, params, lo, hi, fraction)
                for lo, hi in _chunk_ranges(realizations)]
        results = _parallel_chunks(_selfavg_chunk, args, threads)
        stats = SummaryStats()
        r = 0
        for means in results:
            for m in means:
                records.append(RunRecord("self-averaging", seed, r, L, q,
                                         "m2", float(m), aux1=float(r)))
                stats.update(float(m))
                r += 1
        rel_var = stats.variance / stats.mean ** 2
        sizes.append({
            "L": L,
            "q": q,
            "m2": stats.to_dict(),
            "relative_variance": rel_var,
        })

    rels = [s["relative_variance"] for s in sizes]
    summary = {
        "experiment": "self-averaging",
        "seed": seed,
        "model": model,
        "realizations": realizations,
        "fraction": fraction,
        "sizes": sizes,
        "monotone_decreasing": all(b < a for a, b in zip(rels, rels[1:])),
    }
    return records, summary


# ---------------------------------------------------------------------------
# exact-vs-asymptotic collapse
# ---------------------------------------------------------------------------

def run_asymptotic_collapse(Ls, s_values, xi_variant=XI_HESSIAN, seed=0):
    """Exact -log2 E[Xi_2] against the large-L prediction L*m(s) + g(s).

    No sampling: the exact sector mean is evaluated in rational arithmetic
    at the nearest realizable charge q = round_parity(s L), and the residual
    scaled by L exposes the 1/L collapse constant.
    """
    records = []
    per_s = []
    task = 0
    for s in s_values:
        pred = asymptotic_prediction(s, xi_variant=xi_variant)
        rows = []
        for L in Ls:
            q = nearest_sector_charge(L, s)
            exact = m2_mean_bound(L, q)
            asym = L * pred.m + pred.g
            scaled = L * (exact - asym)
            records.append(RunRecord("collapse", seed, task, L, q, "m2",
                                     exact, aux1=asym, aux2=scaled))
            rows.append({"L": L, "q": q, "exact": exact, "asymptotic": asym,
                         "g_estimate": exact - L * pred.m,
                         "scaled_residual": scaled})
            task += 1
        scaled_vals = [row["scaled_residual"] for row in rows]
        mean_abs = sum(abs(v) for v in scaled_vals) / len(scaled_vals)
        spread = ((max(scaled_vals) - min(scaled_vals)) / mean_abs
                  if mean_abs > 0 else 0.0)
        per_s.append({
            "s": s,
            "m": pred.m,
            "g": pred.g,
            "xi": pred.xi,
            "rows": rows,
            "relative_spread": spread,
        })

    summary = {
        "experiment": "collapse",
        "seed": seed,
        "xi_variant": xi_variant,
        "L_values": list(Ls),
        "s_values": [float(s) for s in s_values],
        "per_s": per_s,
    }
    return records, summary


# ---------------------------------------------------------------------------
# participation-entropy checks
# ---------------------------------------------------------------------------

def _pe_chunk(args):
    """Chunk of sector-Haar samples: (sum p^2, shannon bits, scaled first
    sector amplitude weight d*|c|^2)."""
    master, exp_id, L, q, lo, hi = args
    policy = SeedPolicy(master)
    basis = enumerate_sector(L, q)
    d = basis.dimension
    probe = int(basis.states[0])
    vals = np.empty((hi - lo, 3))
    for i in range(lo, hi):
        state = constrained_haar_state(L, q,
                                       seed=policy.stream(exp_id, i))
        p = np.abs(state) ** 2
        vals[i - lo] = (float(p @ p), shannon_pe(state),
                        d * float(p[probe]))
    return vals


def run_pe_check(L, q, samples, seed=0, threads=None, allow_large=False):
    """Participation-entropy statistics of the constrained ensemble against
    the exact Dirichlet moments and the one-component Porter-Thomas law."""
    _budget_check(L, [q], allow_large)
    threads = resolve_threads(threads)
    d = sector_dimension(L, q)
    exp_id = f"pe:L={L}:q={q}"
    args = [(seed, exp_id, L, q, lo, hi) for lo, hi in _chunk_ranges(samples)]
    results = _parallel_chunks(_pe_chunk, args, threads)

    records = []
    ipr_stats = SummaryStats()
    sh_stats = SummaryStats()
    ws = np.empty(samples)
    task = 0
    for vals in results:
        for ipr2, sh, w in vals:
            records.append(RunRecord("pe-check", seed, task, L, q, "s2",
                                     -math.log2(ipr2), aux1=float(w)))
            records.append(RunRecord("pe-check", seed, task, L, q,
                                     "shannon_pe", float(sh)))
            ipr_stats.update(float(ipr2))
            sh_stats.update(float(sh))
            ws[task] = w
            task += 1

    ipr_exact = float(pe_moment_mean(d, 2))
    sh_exact = pe_shannon_mean(d)
    ks = scipy.stats.kstest(ws, lambda w: porter_thomas_cdf(w, d))
    summary = {
        "experiment": "pe-check",
        "seed": seed,
        "L": L,
        "q": q,
        "dimension": d,
        "samples": samples,
        "ipr2": {
            "observed": ipr_stats.to_dict(),
            "exact_mean": ipr_exact,
            "mean_z": (ipr_stats.mean - ipr_exact) / ipr_stats.sem,
        },
        "shannon_pe": {
            "observed": sh_stats.to_dict(),
            "exact_mean": sh_exact,
            "mean_z": (sh_stats.mean - sh_exact) / sh_stats.sem,
        },
        "porter_thomas": {
            "ks_statistic": float(ks.statistic),
            "ks_pvalue": float(ks.pvalue),
        },
    }
    return records, summary
