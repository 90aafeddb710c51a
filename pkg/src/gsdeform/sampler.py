"""Metropolis sampling of the outcome distribution and percolation analysis.

The sampler targets p(sigma) ~ beta^{N_m} 2^{L} h(sigma) with
beta = (3-delta^2)/(2 delta^2), using single-site proposals (uniform site,
uniform alternative outcome, accept with min(1, w'/w)). Heavy lifting happens
in the kernel backends; this module owns chain orchestration, error bars,
the exhaustive small-lattice oracle, and the critical-point estimate.
"""

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernels import KERNEL_NAME, backends
from ._kernels import reference as _reference
from .lattice import build_star_lattice, config_stats, config_weight, decompose_domains

# one sweep = N proposals; proposal arrays are generated in fixed-size slabs
# so that a given seed always yields the same stream regardless of caller
_BATCH_SWEEPS = 2000
_OCC_BATCH_SWEEPS = 50_000

DEFAULT_BURN_IN = 2_000
DEFAULT_MEASURE = 20_000
DEFAULT_BINS = 20


def weight_base(delta):
    """The per-matching-site weight factor (3-delta^2)/(2 delta^2)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return (3.0 - delta * delta) / (2.0 * delta * delta)


@dataclass
class WeightParts:
    """Decomposed weight of a configuration: log w = N_m log(beta) + L log 2."""

    log_weight: float
    n_match: int
    decomposition: object


@dataclass
class ChainState:
    """Mutable Metropolis chain: configuration plus its RNG stream."""

    sigma: np.ndarray
    rng: np.random.Generator
    seed: object
    accepted: int = 0
    proposed: int = 0

    def weight_parts(self, lat, delta):
        stats = config_stats(lat, self.sigma)
        if not stats.admissible:
            raise ValueError("chain configuration has zero weight")
        logw = stats.n_match * math.log(weight_base(delta)) \
            + stats.loop_exponent * math.log(2.0)
        return WeightParts(logw, stats.n_match,
                           decompose_domains(lat, self.sigma))


def chain_state(lat, seed=0):
    """Fresh chain started from the coloring (always a valid configuration)."""
    rng = np.random.default_rng(seed)
    return ChainState(sigma=lat.color.copy(), rng=rng, seed=seed)


def acceptance_ratio(lat, sigma, site, new_label, delta):
    """min-free Metropolis ratio w(sigma')/w(sigma) for one proposed flip."""
    a = int(sigma[site])
    if new_label == a:
        raise ValueError("proposal must change the outcome")
    adj = _reference._adjacency_lists(lat.nbr_ptr, lat.nbr)
    lab = (new_label - a) % 3
    _, ratio = _reference._ratio(int(site), lab, sigma.tolist(),
                                 lat.color.tolist(), adj, weight_base(delta))
    return ratio


def metropolis_step(chain, lat, delta):
    """One single-site update; mutates and returns the chain."""
    v = int(chain.rng.integers(0, lat.n))
    lab = int(chain.rng.integers(1, 3))
    u = float(chain.rng.random())
    b = (int(chain.sigma[v]) + lab) % 3
    ratio = acceptance_ratio(lat, chain.sigma, v, b, delta)
    chain.proposed += 1
    if u < ratio:
        chain.sigma[v] = b
        chain.accepted += 1
    return chain


@dataclass
class ChainRecords:
    """Per-sweep measurement records of one chain run."""

    lat_shape: tuple
    delta: float
    seed: object
    sweeps: int
    accept_rate: float
    ndom: np.ndarray = field(repr=False)
    maxdom: np.ndarray = field(repr=False)
    nmatch: np.ndarray = field(repr=False)
    cross1: np.ndarray = field(repr=False)
    cross2: np.ndarray = field(repr=False)
    mono: np.ndarray = field(repr=False)
    codes: np.ndarray = field(repr=False)


def _proposal_slab(rng, nswp, n):
    sites = rng.integers(0, n, (nswp, n)).astype(np.int32)
    labels = rng.integers(1, 3, (nswp, n)).astype(np.int8)
    urand = rng.random((nswp, n))
    return sites, labels, urand


def run_chain(lat, delta, burn_in=DEFAULT_BURN_IN, measure=DEFAULT_MEASURE,
              seed=0, record_codes=False, count_faces=False):
    """Run burn_in unrecorded sweeps then `measure` recorded ones.

    Fixed (seed, arguments) give a bit-identical record stream on every
    backend. Monochromatic-face counts are recorded only when count_faces
    (faces exist only on periodic lattices).
    """
    if burn_in < 0 or measure <= 0:
        raise ValueError("sweep counts must be positive")
    kern = backends()[KERNEL_NAME]
    rng = np.random.default_rng(seed)
    sigma = lat.color.copy()
    beta = weight_base(delta)
    faces = lat.dodecagons if count_faces else np.zeros((0, 12), dtype=np.int32)

    done = 0
    while done < burn_in:
        step = min(_BATCH_SWEEPS, burn_in - done)
        kern.run_sweeps(sigma, lat.color, lat.nbr_ptr, lat.nbr, beta,
                        *_proposal_slab(rng, step, lat.n))
        done += step

    chunks = []
    accepted = 0
    done = 0
    while done < measure:
        step = min(_BATCH_SWEEPS, measure - done)
        acc, rec = kern.run_sweeps_measured(
            sigma, lat.color, lat.nbr_ptr, lat.nbr, beta,
            *_proposal_slab(rng, step, lat.n),
            lat.edges, lat.cell_i, lat.cell_j, lat.L1, lat.L2, faces,
            record_codes)
        accepted += acc
        chunks.append(rec)
        done += step

    merged = {k: np.concatenate([c[k] for c in chunks]) for k in chunks[0]}
    return ChainRecords(
        lat_shape=(lat.L1, lat.L2, "periodic" if lat.periodic else "open"),
        delta=delta, seed=seed, sweeps=measure,
        accept_rate=accepted / (measure * lat.n), **merged)


def sample_configs(lat, delta, n_samples, spacing=200, burn_in=DEFAULT_BURN_IN,
                   seed=0):
    """Equilibrate, then snapshot the configuration every `spacing` sweeps."""
    if n_samples <= 0 or spacing <= 0 or burn_in < 0:
        raise ValueError("sample counts must be positive")
    kern = backends()[KERNEL_NAME]
    rng = np.random.default_rng(seed)
    sigma = lat.color.copy()
    beta = weight_base(delta)

    def advance(sweeps):
        done = 0
        while done < sweeps:
            step = min(_BATCH_SWEEPS, sweeps - done)
            kern.run_sweeps(sigma, lat.color, lat.nbr_ptr, lat.nbr, beta,
                            *_proposal_slab(rng, step, lat.n))
            done += step

    advance(burn_in)
    out = []
    for _ in range(n_samples):
        advance(spacing)
        out.append(sigma.copy())
    return out


def estimate_p_span(flags, n_bins=DEFAULT_BINS):
    """Mean of crossing booleans with a binned standard error.

    Contiguous bins absorb autocorrelation; requires >= 100 measurements.
    """
    flags = np.asarray(flags, dtype=float)
    if flags.size < 100:
        raise ValueError("need at least 100 measurements")
    p = flags.mean()
    per_bin = flags.size // n_bins
    means = flags[: per_bin * n_bins].reshape(n_bins, per_bin).mean(axis=1)
    err = means.std(ddof=1) / math.sqrt(n_bins)
    return p, err


def exhaustive_distribution(lat, delta):
    """Exact normalized probability table indexed by configuration code.

    Codes are little-endian base-3: code = sum_v sigma_v 3^v. Limited to 12
    sites (3^12 configurations).
    """
    if lat.n > 12:
        raise ValueError("exhaustive enumeration limited to 12 sites")
    p = np.zeros(3**lat.n)
    for cfg in itertools.product(range(3), repeat=lat.n):
        sigma = np.array(cfg, dtype=np.int8)
        w = config_weight(lat, sigma, delta)
        if w > 0.0:
            code = 0
            for v in range(lat.n - 1, -1, -1):
                code = code * 3 + cfg[v]
            p[code] = w
    total = p.sum()
    if total <= 0.0:
        raise ValueError("no admissible configurations")
    return p / total


def occupancy_distribution(lat, delta, sweeps, burn_in=DEFAULT_BURN_IN, seed=0):
    """Low-variance empirical distribution over configuration codes.

    Accumulates the expected occupancy of every proposal (weight 1-alpha on
    the current code, alpha on the proposed one) instead of counting realized
    states, which removes the accept/reject noise of plain frequencies.
    """
    if lat.n > 12:
        raise ValueError("occupancy table limited to 12 sites")
    if sweeps <= 0:
        raise ValueError("sweep counts must be positive")
    kern = backends()[KERNEL_NAME]
    rng = np.random.default_rng(seed)
    sigma = lat.color.copy()
    beta = weight_base(delta)
    done = 0
    while done < burn_in:
        step = min(_OCC_BATCH_SWEEPS, burn_in - done)
        kern.run_sweeps(sigma, lat.color, lat.nbr_ptr, lat.nbr, beta,
                        *_proposal_slab(rng, step, lat.n))
        done += step
    occ = np.zeros(3**lat.n)
    done = 0
    while done < sweeps:
        step = min(_OCC_BATCH_SWEEPS, sweeps - done)
        kern.accumulate_occupancy(sigma, lat.color, lat.nbr_ptr, lat.nbr, beta,
                                  *_proposal_slab(rng, step, lat.n), occ)
        done += step
    return occ / occ.sum()


@dataclass
class ScanPoint:
    """One (delta, size) cell of a spanning-probability scan."""

    delta: float
    L1: int
    L2: int
    p_span_dim1: float
    err1: float
    p_span_dim2: float
    err2: float
    max_domain: int
    mean_domain: float
    n_samples: int
    seed: int
    accept_rate: float


@dataclass
class ScanResult:
    points: list
    deltas: tuple
    sizes: tuple
    sweeps: int
    burn_in: int
    seed: int

    def curve(self, size):
        """(deltas, p_span, err) for one size, averaged over both dimensions."""
        pts = sorted((p for p in self.points if (p.L1, p.L2) == size),
                     key=lambda p: p.delta)
        d = np.array([p.delta for p in pts])
        ps = np.array([(p.p_span_dim1 + p.p_span_dim2) / 2 for p in pts])
        err = np.array([(p.err1 + p.err2) / 2 for p in pts])
        return d, ps, err


def _scan_task(args):
    (L1, L2, delta, sweeps, burn_in, seed, spawn_key) = args
    lat = build_star_lattice(L1, L2, boundary="open")
    task_seed = np.random.SeedSequence((seed, spawn_key))
    rec = run_chain(lat, delta, burn_in=burn_in, measure=sweeps, seed=task_seed)
    p1, e1 = estimate_p_span(rec.cross1)
    p2, e2 = estimate_p_span(rec.cross2)
    return ScanPoint(
        delta=delta, L1=L1, L2=L2,
        p_span_dim1=p1, err1=e1, p_span_dim2=p2, err2=e2,
        max_domain=int(rec.maxdom.max()),
        mean_domain=float((lat.n / rec.ndom).mean()),
        n_samples=sweeps, seed=seed, accept_rate=rec.accept_rate)


def scan_p_span(sizes, deltas, sweeps=DEFAULT_MEASURE, burn_in=DEFAULT_BURN_IN,
                seed=0, threads=1):
    """Spanning probability over a (size, delta) grid of open lattices.

    Grid tasks are independent; each draws its RNG stream from
    (seed, grid index) so results do not depend on scheduling.
    """
    tasks = []
    for idx, ((L1, L2), delta) in enumerate(itertools.product(sizes, deltas)):
        tasks.append((L1, L2, float(delta), int(sweeps), int(burn_in),
                      int(seed), idx))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(_scan_task, tasks))
    else:
        points = [_scan_task(t) for t in tasks]
    return ScanResult(points=points, deltas=tuple(float(d) for d in deltas),
                      sizes=tuple((int(a), int(b)) for a, b in sizes),
                      sweeps=int(sweeps), burn_in=int(burn_in), seed=int(seed))


def _pair_crossings(d1, p1, d2, p2):
    """Interpolated roots of p1(delta) - p2(delta) on a shared grid."""
    if not np.array_equal(d1, d2):
        raise ValueError("curves must share a delta grid")
    diff = p1 - p2
    roots = []
    for i in range(len(diff) - 1):
        a, b = diff[i], diff[i + 1]
        if a == 0.0:
            roots.append(d1[i])
        elif a * b < 0.0:
            t = a / (a - b)
            roots.append(d1[i] + t * (d1[i + 1] - d1[i]))
    if diff[-1] == 0.0:
        roots.append(d1[-1])
    return roots


def estimate_delta_c(curves):
    """Critical deformation from pairwise crossings of p_span curves.

    `curves` maps a size label to (deltas, p_span). Returns (delta_c, err)
    where err is half the spread of the pairwise crossings, floored at half
    the grid step.
    """
    labels = sorted(curves)
    if len(labels) < 2:
        raise ValueError("need at least two sizes to locate a crossing")
    crossings = []
    grid_step = None
    for la, lb in itertools.combinations(labels, 2):
        da, pa = curves[la]
        db, pb = curves[lb]
        da = np.asarray(da, dtype=float)
        db = np.asarray(db, dtype=float)
        if len(da) < 5:
            raise ValueError("need at least 5 delta points")
        grid_step = np.diff(da).max()
        roots = _pair_crossings(da, np.asarray(pa, float), db, np.asarray(pb, float))
        crossings.extend(roots)
    if not crossings:
        raise ValueError("p_span curves do not cross on the grid")
    crossings = np.array(crossings)
    delta_c = crossings.mean()
    err = max((crossings.max() - crossings.min()) / 2, grid_step / 2)
    return float(delta_c), float(err)


def delta_c_from_scan(result):
    curves = {size: result.curve(size)[:2] for size in result.sizes}
    return estimate_delta_c(curves)


def loop_probability_mc(cells=4, delta=1.0, sweeps=DEFAULT_MEASURE,
                        burn_in=DEFAULT_BURN_IN, seed=0):
    """MC estimate of the probability that one dodecagon is monochromatic.

    Averages the per-sweep count of all-same-outcome faces on a periodic
    lattice over its faces; returns (estimate, binned stderr).
    """
    lat = build_star_lattice(cells, cells, boundary="periodic")
    rec = run_chain(lat, delta, burn_in=burn_in, measure=sweeps, seed=seed,
                    count_faces=True)
    n_faces = lat.dodecagons.shape[0]
    per_sweep = rec.mono / n_faces
    p = per_sweep.mean()
    per_bin = per_sweep.size // DEFAULT_BINS
    means = per_sweep[: per_bin * DEFAULT_BINS].reshape(DEFAULT_BINS, per_bin).mean(axis=1)
    err = means.std(ddof=1) / math.sqrt(DEFAULT_BINS)
    return float(p), float(err)


SCAN_CSV_COLUMNS = ("delta", "L1", "L2", "p_span_dim1", "err1", "p_span_dim2",
                    "err2", "max_domain", "mean_domain", "n_samples", "seed")


def scan_csv_text(result, meta=None):
    """Render a ScanResult as CSV text with '#' metadata comment lines.

    Deterministic: identical results and metadata give identical bytes.
    """
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_CSV_COLUMNS)
    for p in result.points:
        writer.writerow([
            f"{p.delta:.6g}", p.L1, p.L2,
            f"{p.p_span_dim1:.8g}", f"{p.err1:.8g}",
            f"{p.p_span_dim2:.8g}", f"{p.err2:.8g}",
            p.max_domain, f"{p.mean_domain:.8g}", p.n_samples, p.seed,
        ])
    return buf.getvalue()
