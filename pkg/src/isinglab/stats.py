"""Monte Carlo estimators for interface observables and the quantitative
checks built on them: climb/height probabilities, the alpha rate table,
the location m* of the maximum, sub-multiplicativity and super-additivity
bands, the multiscale coupling of maxima, and small consistency checks.

Error bars: binomial estimates carry a sqrt(p(1-p)/n) stderr inflated to
the batch-means stderr (32 batches) when the chain autocorrelation makes
that larger; pass/fail decisions use Wilson intervals.  Constants that
the theory leaves implicit (epsilon-like slacks, prefactors) appear as
named parameters with documented desk-scale defaults; reports label them
as bands, never as exact constants.  Every estimator is a deterministic
function of its parameters and the chain seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from . import _kernels
from .interface import extract
from .ising import ChainParams, SpinConfig, run_chain
from .lattice import FaceRef, l0_face
from .pillars import decompose, event_A, event_E, event_G, pillar_from_config
from .walls import wall_excess, walls_of

Z95 = 1.959963984540054
Z95_ONE_SIDED = 1.6448536269514722
N_BATCHES = 32

_STRUCT26 = np.ones((3, 3, 3), dtype=bool)


# -- plumbing ------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n_samples: int
    seed: int
    method: str  # "binomial" or "batch-means"

    def __post_init__(self):
        if self.method not in ("binomial", "batch-means"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.stderr >= 0 or math.isnan(self.stderr)):
            raise ValueError("stderr must be nonnegative")


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("empty sample")
    p = k / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def batch_means_stderr(series, n_batches: int = N_BATCHES) -> float:
    """Stderr of the series mean from contiguous batch means; falls back
    to the naive stderr when the series is too short to batch."""
    arr = np.asarray(series, dtype=float)
    n = arr.size
    if n < 2 * n_batches:
        return float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    size = n // n_batches
    means = arr[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def _binomial_estimate(series, seed: int) -> Estimate:
    arr = np.asarray(series, dtype=np.int8)
    n = arr.size
    if n == 0:
        raise ValueError("zero-sample degenerate params")
    p = float(arr.mean())
    se = math.sqrt(p * (1 - p) / n)
    se = max(se, batch_means_stderr(arr))
    return Estimate(p, se, n, seed, "binomial")


def l_minus_margin(n: int) -> int:
    """Margin of the interior window: ceil(log^2 n) cells, at least 1."""
    return max(1, math.ceil(math.log(n) ** 2))


def half_width(dims) -> int:
    """n for a 2n+1 footprint."""
    return (dims.nx - 1) // 2


def boundary_cells(dims, a: int, b: int) -> int:
    """Cell distance from the column (a, b) to outside the footprint."""
    return 1 + min(
        a - dims.ax0,
        dims.ax0 + dims.nx - 1 - a,
        b - dims.ay0,
        dims.ay0 + dims.ny - 1 - b,
    )


def interior_window(dims) -> list[tuple[int, int]]:
    """Columns at boundary distance >= the log^2 margin."""
    m = l_minus_margin(max(2, half_width(dims)))
    return [
        (a, b)
        for a in range(dims.ax0, dims.ax0 + dims.nx)
        for b in range(dims.ay0, dims.ay0 + dims.ny)
        if boundary_cells(dims, a, b) >= m
    ]


def box_h_cap(dims) -> int:
    """Tallest representable height: one past the top cell layer."""
    return dims.az0 + dims.nz


# -- per-sample fields ---------------------------------------------------


def climb_heights(cfg: SpinConfig, h_max: int) -> np.ndarray:
    """Per column (a, b): the largest h <= h_max such that a plus path
    from layer 0 reaches layer h-1 while staying below height h, in the
    raw configuration; 0 when the column's base cell is minus."""
    d = cfg.dims
    k0 = -d.az0
    plus = cfg.spins[:, :, k0 : k0 + h_max] == 1
    out = np.zeros((d.nx, d.ny), np.int32)
    for h in range(1, h_max + 1):
        lab, n_lab = ndimage.label(plus[:, :, :h], structure=_STRUCT26)
        if n_lab == 0:
            break
        tops = np.zeros(n_lab + 1, dtype=bool)
        tops[np.unique(lab[:, :, h - 1])] = True
        tops[0] = False
        base = lab[:, :, 0]
        out[(base > 0) & tops[base]] = h
    return out


def pillar_heights(cfg: SpinConfig) -> tuple[np.ndarray, int]:
    """(heights array, interface maximum M) from the flip fixpoint."""
    pad = cfg.padded()
    _kernels.flip_fixpoint_pad(pad, -cfg.dims.az0)
    ph, m = _kernels.upper_plus_observables(pad, -cfg.dims.az0)
    return ph, int(m)


# -- core estimators -----------------------------------------------------


def estimate_event(kind: str, x: FaceRef, h: int, chain: ChainParams) -> Estimate:
    """Probability of a climb (A), height (E), or height-with-empty-base
    (G) event at the column of x, over the kept chain samples."""
    if kind not in ("A", "E", "G"):
        raise ValueError(f"unknown event kind {kind!r}")
    if h < 1:
        raise ValueError("h must be a positive integer")
    d = chain.dims
    if h > box_h_cap(d):
        raise ValueError("h exceeds the box height cap")
    a, b = (x.fx - 1) // 2, (x.fy - 1) // 2
    if kind in ("E", "G"):
        m = l_minus_margin(max(2, half_width(d)))
        if boundary_cells(d, a, b) < m:
            raise ValueError("x outside the interior window")
    hits = []
    for cfg in run_chain(chain):
        if kind == "A":
            hits.append(event_A(cfg, x, h))
        else:
            iface = extract(cfg)
            if kind == "E":
                hits.append(event_E(iface, x, h))
            else:
                hits.append(event_G(cfg, iface, x, h))
    return _binomial_estimate(hits, chain.seed)


def estimate_event_window(kind: str, h: int, chain: ChainParams) -> Estimate:
    """Spatially averaged event frequency over the interior window; the
    estimand is the window average of the per-column probabilities, and
    the stderr comes from batch means of the per-sample window averages."""
    if kind not in ("A", "E"):
        raise ValueError("window averaging supports kinds A and E")
    if h < 1:
        raise ValueError("h must be a positive integer")
    d = chain.dims
    if h > box_h_cap(d):
        raise ValueError("h exceeds the box height cap")
    window = interior_window(d)
    idx = (
        np.array([a - d.ax0 for a, _ in window]),
        np.array([b - d.ay0 for _, b in window]),
    )
    vals = []
    for cfg in run_chain(chain):
        if kind == "A":
            f = climb_heights(cfg, h) >= h
        else:
            f = pillar_heights(cfg)[0] >= h
        vals.append(float(f[idx].mean()))
    if not vals:
        raise ValueError("zero-sample degenerate params")
    arr = np.asarray(vals)
    return Estimate(
        float(arr.mean()),
        batch_means_stderr(arr),
        arr.size,
        chain.seed,
        "batch-means",
    )


# -- the alpha table -----------------------------------------------------


@dataclass
class AlphaTable:
    beta: float
    n: int
    entries: dict  # h -> Estimate of alpha_h = -log p_h
    alpha_hat: Estimate  # least-squares slope of alpha_h over h >= 2
    alpha_sup: Estimate  # sup-form estimate max_h (alpha_h - slack)/h
    flags: dict = field(default_factory=dict)  # h -> "resolution-limited"


def alpha_table(
    beta: float, n: int, h_max: int, chain: ChainParams, slack: float = 0.25
) -> AlphaTable:
    """Climb-rate table: alpha_h = -log P(climb to height h at the
    center column), plus two extrapolations of the linear rate.  The
    slack parameter is the desk-scale stand-in for the theory's epsilon
    in the sup form; both extrapolations are reported, never merged."""
    d = chain.dims
    if abs(chain.beta - beta) > 1e-12:
        raise ValueError("chain beta does not match")
    if h_max < 1 or h_max > box_h_cap(d):
        raise ValueError("h_max out of range")
    o_idx = (-d.ax0, -d.ay0)
    counts = np.zeros(h_max + 1, np.int64)
    n_samples = 0
    series: list[np.ndarray] = []
    for cfg in run_chain(chain):
        ch = int(climb_heights(cfg, h_max)[o_idx])
        counts[1 : ch + 1] += 1
        series.append(ch)
        n_samples += 1
    if n_samples == 0:
        raise ValueError("zero-sample degenerate params")
    ch_arr = np.asarray(series)
    entries: dict[int, Estimate] = {}
    flags: dict[int, str] = {}
    for h in range(1, h_max + 1):
        k = int(counts[h])
        if k == 0:
            flags[h] = "resolution-limited"
            entries[h] = Estimate(
                float("inf"), float("inf"), n_samples, chain.seed, "binomial"
            )
            continue
        p = k / n_samples
        se_p = math.sqrt(p * (1 - p) / n_samples)
        se_p = max(se_p, batch_means_stderr(ch_arr >= h))
        entries[h] = Estimate(
            -math.log(p), se_p / p, n_samples, chain.seed, "binomial"
        )
    finite = [
        (h, e.value, e.stderr)
        for h, e in entries.items()
        if math.isfinite(e.value)
    ]
    tail = [p for p in finite if p[0] >= 2] or finite[-1:]
    if len(tail) >= 2:
        hs = np.array([p[0] for p in tail], float)
        ys = np.array([p[1] for p in tail], float)
        ws = 1.0 / np.maximum([p[2] for p in tail], 1e-12)
        coef, cov = np.polyfit(hs, ys, 1, w=ws, cov="unscaled")
        slope, slope_se = float(coef[0]), float(math.sqrt(cov[0, 0]))
    elif tail:
        h, a, se = tail[0]
        slope, slope_se = a / h, se / h
    else:
        slope, slope_se = float("inf"), float("inf")
    alpha_hat = Estimate(slope, slope_se, n_samples, chain.seed, "binomial")
    if finite:
        h_sup, a_sup, se_sup = max(
            finite, key=lambda p: (p[1] - slack) / p[0]
        )
        alpha_sup = Estimate(
            (a_sup - slack) / h_sup,
            se_sup / h_sup,
            n_samples,
            chain.seed,
            "binomial",
        )
    else:
        alpha_sup = Estimate(
            float("inf"), float("inf"), n_samples, chain.seed, "binomial"
        )
    return AlphaTable(beta, n, entries, alpha_hat, alpha_sup, flags)


class MStarResult(NamedTuple):
    value: int
    lo: int  # crossing when every alpha_h is raised by one stderr
    hi: int  # crossing when every alpha_h is lowered by one stderr
    threshold: float


def m_star(table: AlphaTable, n: int, beta: float) -> MStarResult:
    """First h with alpha_h above 2 log(2n) - 2 beta, with the crossing
    interval under +-1 stderr on the table entries."""
    threshold = 2 * math.log(2 * n) - 2 * beta

    def crossing(delta: float):
        for h in sorted(table.entries):
            e = table.entries[h]
            v = e.value + delta * (e.stderr if math.isfinite(e.stderr) else 0)
            if v > threshold:
                return h
        return None

    value = crossing(0.0)
    if value is None:
        raise ValueError("threshold not crossed within the table range")
    lo = crossing(1.0) or value
    hi = crossing(-1.0) or max(table.entries)
    return MStarResult(value, lo, hi, threshold)


# -- the law of the maximum ----------------------------------------------


@dataclass
class MaxDistReport:
    counts: dict  # M value -> count, whole box
    counts_window: dict  # M over the interior window only
    n_samples: int
    median: float
    mean: Estimate
    beta: float


def max_dist(n: int, beta: float, chain: ChainParams) -> MaxDistReport:
    """Empirical law of the interface maximum, whole box and restricted
    to the interior window."""
    d = chain.dims
    window = interior_window(d)
    idx = (
        np.array([a - d.ax0 for a, _ in window]),
        np.array([b - d.ay0 for _, b in window]),
    )
    ms: list[int] = []
    ms_win: list[int] = []
    for cfg in run_chain(chain):
        ph, m = pillar_heights(cfg)
        ms.append(m)
        ms_win.append(int(ph[idx].max()) if len(window) else 0)
    if not ms:
        raise ValueError("zero-sample degenerate params")
    arr = np.asarray(ms)
    counts = dict(zip(*(x.tolist() for x in np.unique(arr, return_counts=True))))
    arr_w = np.asarray(ms_win)
    counts_w = dict(
        zip(*(x.tolist() for x in np.unique(arr_w, return_counts=True)))
    )
    mean = Estimate(
        float(arr.mean()),
        batch_means_stderr(arr),
        arr.size,
        chain.seed,
        "batch-means",
    )
    return MaxDistReport(
        counts, counts_w, arr.size, float(np.median(arr)), mean, chain.beta
    )


# -- inequality checks ---------------------------------------------------


@dataclass
class TailReport:
    inequality: str
    estimate: Estimate
    bound: float
    confidence: float
    passed: bool
    context: str


def check_height_lower_bound(
    est: Estimate, beta: float, h: int, factor: float = 0.5
) -> TailReport:
    """One-sided check that the height-h probability clears the explicit
    exponential floor factor*exp(-(4 beta + exp(-4 beta)) h); the factor
    is a desk-scale band standing in for the theory's 1 - epsilon."""
    bound = factor * math.exp(-(4 * beta + math.exp(-4 * beta)) * h)
    lo = est.value - Z95_ONE_SIDED * est.stderr
    return TailReport(
        inequality=f"P(height >= {h}) >= {factor}*exp(-(4b+e^-4b)*{h})",
        estimate=est,
        bound=bound,
        confidence=0.95,
        passed=lo >= bound,
        context="desk-scale band, one-sided 95%",
    )


@dataclass
class SubmultReport:
    inequality: str
    p: Estimate
    p1: Estimate
    p2: Estimate
    slack: float
    bound: float
    confidence: float
    passed: bool


def check_submult(
    h1: int,
    h2: int,
    x: FaceRef,
    x1: FaceRef,
    x2: FaceRef,
    chain: ChainParams,
    slack: float = 0.25,
) -> SubmultReport:
    """One-sided test of P(climb h1+h2 at x) <= (1+slack) * P(climb h1
    at x1) * P(climb h2 at x2) on a shared chain; the slack is the
    desk-scale stand-in for the theory's 1 + epsilon."""
    if h1 < 1 or h2 < 1:
        raise ValueError("heights must be positive integers")
    h = h1 + h2
    d = chain.dims
    if h > box_h_cap(d):
        raise ValueError("h1 + h2 exceeds the box height cap")
    cols = []
    for f in (x, x1, x2):
        cols.append(((f.fx - 1) // 2 - d.ax0, (f.fy - 1) // 2 - d.ay0))
    s = [[], [], []]
    for cfg in run_chain(chain):
        ch = climb_heights(cfg, h)
        s[0].append(ch[cols[0]] >= h)
        s[1].append(ch[cols[1]] >= h1)
        s[2].append(ch[cols[2]] >= h2)
    p = _binomial_estimate(s[0], chain.seed)
    p1 = _binomial_estimate(s[1], chain.seed)
    p2 = _binomial_estimate(s[2], chain.seed)
    bound = (1 + slack) * p1.value * p2.value
    se = math.sqrt(
        p.stderr**2
        + ((1 + slack) * p2.value * p1.stderr) ** 2
        + ((1 + slack) * p1.value * p2.stderr) ** 2
    )
    return SubmultReport(
        inequality=f"P(A_{h}) <= (1+{slack})*P(A_{h1})*P(A_{h2})",
        p=p,
        p1=p1,
        p2=p2,
        slack=slack,
        bound=bound,
        confidence=0.95,
        passed=p.value <= bound + Z95_ONE_SIDED * se,
    )


def check_submult_window(
    h1: int, h2: int, chain: ChainParams, slack: float = 0.25
) -> SubmultReport:
    """Window-averaged variant of check_submult: each factor is averaged
    over the interior window for statistical power."""
    if h1 < 1 or h2 < 1:
        raise ValueError("heights must be positive integers")
    h = h1 + h2
    d = chain.dims
    if h > box_h_cap(d):
        raise ValueError("h1 + h2 exceeds the box height cap")
    window = interior_window(d)
    idx = (
        np.array([a - d.ax0 for a, _ in window]),
        np.array([b - d.ay0 for _, b in window]),
    )
    s = [[], [], []]
    for cfg in run_chain(chain):
        ch = climb_heights(cfg, h)[idx]
        s[0].append(float((ch >= h).mean()))
        s[1].append(float((ch >= h1).mean()))
        s[2].append(float((ch >= h2).mean()))
    ests = []
    for series in s:
        arr = np.asarray(series)
        if arr.size == 0:
            raise ValueError("zero-sample degenerate params")
        ests.append(
            Estimate(
                float(arr.mean()),
                batch_means_stderr(arr),
                arr.size,
                chain.seed,
                "batch-means",
            )
        )
    p, p1, p2 = ests
    bound = (1 + slack) * p1.value * p2.value
    se = math.sqrt(
        p.stderr**2
        + ((1 + slack) * p2.value * p1.stderr) ** 2
        + ((1 + slack) * p1.value * p2.stderr) ** 2
    )
    return SubmultReport(
        inequality=f"avg P(A_{h}) <= (1+{slack})*avg P(A_{h1})*avg P(A_{h2})",
        p=p,
        p1=p1,
        p2=p2,
        slack=slack,
        bound=bound,
        confidence=0.95,
        passed=p.value <= bound + Z95_ONE_SIDED * se,
    )


@dataclass
class MultiscaleReport:
    ks: float
    kappa: int
    n_big: int
    n_blocks: int
    beta: float
    context: str


def multiscale(
    n: int, big_l: int, chain_big: ChainParams, chain_small: ChainParams
) -> MultiscaleReport:
    """Kolmogorov-Smirnov distance between the law of the maximum over
    the large box and the law of the maximum of kappa = (n/L)^2
    independent small-box maxima.  kappa = 1 degenerates to comparing
    the two laws directly; kappa in {2, 3} is rejected as too coarse to
    tile the box."""
    if abs(chain_big.beta - chain_small.beta) > 1e-12:
        raise ValueError("mismatched betas")
    if big_l < 1 or n % big_l != 0:
        raise ValueError("L must divide n")
    kappa = (n // big_l) ** 2
    if kappa in (2, 3):
        raise ValueError("kappa must be 1 or at least 4")
    big = np.asarray([pillar_heights(c)[1] for c in run_chain(chain_big)])
    small = np.asarray([pillar_heights(c)[1] for c in run_chain(chain_small)])
    if big.size == 0 or small.size < kappa:
        raise ValueError("zero-sample degenerate params")
    n_blocks = small.size // kappa
    blocks = small[: n_blocks * kappa].reshape(n_blocks, kappa).max(axis=1)
    support = np.arange(0, int(max(big.max(), blocks.max())) + 1)
    f_big = np.searchsorted(np.sort(big), support, side="right") / big.size
    f_blk = (
        np.searchsorted(np.sort(blocks), support, side="right") / n_blocks
    )
    ks = float(np.abs(f_big - f_blk).max())
    return MultiscaleReport(
        ks=ks,
        kappa=kappa,
        n_big=int(big.size),
        n_blocks=n_blocks,
        beta=chain_big.beta,
        context="predicted coupling error shape: O((R/n)^(1/3) + log^-10 n)",
    )


# -- counts and correlations ---------------------------------------------


def count_Z(samples, h: int, seed: int = 0) -> tuple[Estimate, Estimate]:
    """Mean and variance of Z_h, the number of interior columns whose
    pillar reaches height h with an empty base after a clean climb.
    The variance stderr uses the normal-theory approximation
    var * sqrt(2/(n-1)), a desk-scale convenience."""
    if h < 1:
        raise ValueError("h must be a positive integer")
    zs = []
    for cfg in samples:
        d = cfg.dims
        window = interior_window(d)
        iface = None
        z = 0
        for a, b in window:
            if cfg.spin(a, b, 0) != 1:
                continue
            x = l0_face(a, b)
            if not event_A(cfg, x, h):
                continue
            if iface is None:
                iface = extract(cfg)
            if event_G(cfg, iface, x, h):
                z += 1
        zs.append(z)
    if not zs:
        raise ValueError("zero-sample degenerate params")
    arr = np.asarray(zs, dtype=float)
    mean = Estimate(
        float(arr.mean()), batch_means_stderr(arr), arr.size, seed, "batch-means"
    )
    v = float(arr.var(ddof=1)) if arr.size > 1 else 0.0
    v_se = v * math.sqrt(2 / (arr.size - 1)) if arr.size > 1 else float("nan")
    var = Estimate(v, v_se, arr.size, seed, "batch-means")
    return mean, var


@dataclass
class DecayCurve:
    observable: str
    points: list  # (distance, covariance, stderr)
    slope: float  # of log|cov| against distance, over positive entries
    slope_negative: bool


def correlation_decay(
    observable: str, distances, chain: ChainParams
) -> DecayCurve:
    """Covariance of a per-column observable at column pairs separated
    horizontally by each distance, with batch-means error bars."""
    if observable not in ("wall-excess", "pillar-height"):
        raise ValueError(f"unknown observable {observable!r}")
    d = chain.dims
    distances = sorted(set(int(r) for r in distances))
    if any(r < 0 or r >= d.nx for r in distances):
        raise ValueError("distances must fit in the footprint")
    fields = []
    for cfg in run_chain(chain):
        if observable == "pillar-height":
            fields.append(pillar_heights(cfg)[0].astype(float))
        else:
            grid = np.zeros((d.nx, d.ny))
            iface = extract(cfg)
            for w in walls_of(iface):
                m = wall_excess(w)
                for f in w.faces:
                    a, b = (f.fx - 1) // 2, (f.fy - 1) // 2
                    if d.in_footprint(a, b):
                        grid[a - d.ax0, b - d.ay0] = m
            fields.append(grid)
    if not fields:
        raise ValueError("zero-sample degenerate params")
    stack = np.stack(fields)
    mean_field = stack.mean(axis=0)
    points = []
    for r in distances:
        prods = [
            float(
                ((f - mean_field)[: d.nx - r, :] * (f - mean_field)[r:, :]).mean()
            )
            for f in fields
        ]
        arr = np.asarray(prods)
        points.append((r, float(arr.mean()), batch_means_stderr(arr)))
    pos = [(r, c) for r, c, _ in points if r > 0 and c > 0]
    if len(pos) >= 2:
        rs = np.array([p[0] for p in pos], float)
        cs = np.log(np.array([p[1] for p in pos]))
        slope = float(np.polyfit(rs, cs, 1)[0])
    else:
        slope = float("nan")
    return DecayCurve(observable, points, slope, slope < 0)


@dataclass
class CondReport:
    e_given_a: Estimate | None
    a_given_e: Estimate | None
    n_a: int
    n_e: int
    flags: list


def cond_consistency(h: int, x: FaceRef, chain: ChainParams) -> CondReport:
    """Conditional frequencies P(height | climb) and P(climb | height);
    an unobserved conditioning event yields a flag, never a number."""
    if h < 1:
        raise ValueError("h must be a positive integer")
    n_a = n_e = n_both = n_tot = 0
    for cfg in run_chain(chain):
        a = event_A(cfg, x, h)
        e = event_E(extract(cfg), x, h)
        n_a += a
        n_e += e
        n_both += a and e
        n_tot += 1
    if n_tot == 0:
        raise ValueError("zero-sample degenerate params")
    flags = []

    def cond(num, den, name):
        if den == 0:
            flags.append(f"{name}: conditioning event never observed")
            return None
        p = num / den
        return Estimate(
            p, math.sqrt(p * (1 - p) / den), den, chain.seed, "binomial"
        )

    return CondReport(
        cond(n_both, n_a, "P(E|A)"),
        cond(n_both, n_e, "P(A|E)"),
        n_a,
        n_e,
        flags,
    )
