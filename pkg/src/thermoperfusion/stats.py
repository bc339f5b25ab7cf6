"""Statistical battery: KS normality check, paired t, Wilcoxon signed-rank,
and the combined significance classification used to annotate result tables.

Test selection per ROI: the paired differences are checked for normality
with a one-sample Kolmogorov-Smirnov test (parameters estimated from the
sample, classical asymptotic p -- anti-conservative, by design); normal
differences go to the paired t test, non-normal ones to the Wilcoxon
signed-rank test. A temperature change must additionally exceed the
camera sensitivity threshold to count as a significant change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateSampleError, InvalidInputError, PairingError
from .roi import Quantity, RoiSeries

DEFAULT_SENSITIVITY_C = 0.05  # camera sensitivity gate for temperature, deg C
NORMALITY_ALPHA = 0.05


# ---------------------------------------------------------------------------
# Scalar special functions (kept dependency-free on purpose; reference
# implementations in SciPy serve as independent oracles in the test suite).

_SQRT2 = math.sqrt(2.0)


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / _SQRT2))


def _kolmogorov_sf(x: float) -> float:
    """P(K > x) for the Kolmogorov distribution, by alternating series."""
    if x <= 0:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * x * x)
        total += term
        if abs(term) < 1e-16:
            break
    return min(1.0, max(0.0, 2.0 * total))


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def _betai(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
             + a * math.log(x) + b * math.log(1.0 - x))
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def _t_sf(t: float, df: int) -> float:
    """One-sided survival P(T > t) of Student's t."""
    p_two = _betai(df / 2.0, 0.5, df / (df + t * t))
    return p_two / 2.0 if t >= 0 else 1.0 - p_two / 2.0


# ---------------------------------------------------------------------------
# Tests


def ks_normality(sample) -> float:
    """One-sample KS p-value against Normal(sample mean, sample sd)."""
    x = np.asarray(sample, dtype=np.float64)
    if x.ndim != 1 or len(x) < 8:
        raise InvalidInputError("normality check needs a 1-D sample of length >= 8")
    n = len(x)
    mu = float(x.mean())
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        raise DegenerateSampleError("constant sample; normality undefined")
    xs = np.sort(x)
    cdf = np.array([_norm_cdf((v - mu) / sd) for v in xs])
    i = np.arange(1, n + 1)
    d_plus = float(np.max(i / n - cdf))
    d_minus = float(np.max(cdf - (i - 1) / n))
    d = max(d_plus, d_minus)
    return _kolmogorov_sf(math.sqrt(n) * d)


def paired_t(x, y) -> tuple[float, float, int]:
    """Paired Student's t on differences y - x: (t, two-sided p, df)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise PairingError("paired t requires two 1-D sequences of equal length")
    n = len(x)
    if n < 2:
        raise InvalidInputError("paired t needs at least 2 pairs")
    d = y - x
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise DegenerateSampleError("all paired differences identical")
    t = float(d.mean()) / (sd / math.sqrt(n))
    df = n - 1
    p = _betai(df / 2.0, 0.5, df / (df + t * t))
    return t, min(1.0, max(0.0, p)), df


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


EXACT_WILCOXON_MAX_N = 20


def wilcoxon_signed_rank(x, y) -> tuple[float, float]:
    """Wilcoxon signed-rank on differences y - x: (W, two-sided p).

    Zero differences are dropped; tied magnitudes get average ranks;
    W = min(W+, W-). p is exact by enumeration of the sign distribution
    for effective n <= 20, else a tie-corrected normal approximation
    with continuity correction.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise PairingError("Wilcoxon requires two 1-D sequences of equal length")
    d = y - x
    d = d[d != 0.0]
    n = len(d)
    if n == 0:
        raise DegenerateSampleError("all paired differences are zero")
    ranks = _average_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)

    if n <= EXACT_WILCOXON_MAX_N:
        p = _wilcoxon_exact_cdf(ranks, w)
        return w, min(1.0, 2.0 * p)

    mu = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var -= float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
    if var <= 0:
        raise DegenerateSampleError("zero variance in signed-rank statistic")
    z = (w - mu + 0.5) / math.sqrt(var)
    return w, min(1.0, max(0.0, 2.0 * _norm_cdf(z)))


def _wilcoxon_exact_cdf(ranks: np.ndarray, w: float) -> float:
    """P(W+ <= w) over all equiprobable sign assignments.

    Works on doubled ranks so average ranks stay integral.
    """
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:len(counts) - r]
        counts = counts + shifted
    threshold = int(math.floor(2.0 * w + 1e-9))
    return float(counts[:threshold + 1].sum()) / float(2 ** len(doubled))


# ---------------------------------------------------------------------------
# Combined classification


class TestKind(str, Enum):
    T_PAIRED = "T_PAIRED"
    WILCOXON = "WILCOXON"


TestKind.__test__ = False  # not a pytest test class despite the name


class Significance(str, Enum):
    NONE = "NONE"
    P05 = "P05"      # p < 0.05
    P001 = "P001"    # p < 0.001


class PairingPolicy(str, Enum):
    BLOCK = "block"        # collapse the longer series blockwise when lengths divide
    TRUNCATE = "truncate"  # index-to-index on the common prefix


@dataclass(frozen=True)
class TestReport:
    """Outcome of the significance classification for one ROI/valence."""

    __test__ = False  # not a pytest test class despite the name

    test_used: TestKind | None
    statistic: float
    p_value: float
    n_pairs: int
    normality_p: float
    significance: Significance
    technically_significant: bool
    delta_abs: float
    pairing_policy: PairingPolicy
    diagnostic: str = ""

    @property
    def significant(self) -> bool:
        """Headline verdict: statistical and (where gated) technical."""
        return self.significance is not Significance.NONE and self.technically_significant


def pair_series(baseline: np.ndarray, valence: np.ndarray,
                policy: PairingPolicy) -> tuple[np.ndarray, np.ndarray]:
    """Align two unequal-length series into pairs per the chosen policy."""
    b = np.asarray(baseline, dtype=np.float64)
    v = np.asarray(valence, dtype=np.float64)
    if len(b) == 0 or len(v) == 0:
        raise PairingError("cannot pair with an empty series")
    if policy is PairingPolicy.BLOCK:
        if len(v) % len(b) == 0:
            k = len(v) // len(b)
            return b, v.reshape(len(b), k).mean(axis=1)
        if len(b) % len(v) == 0:
            k = len(b) // len(v)
            return b.reshape(len(v), k).mean(axis=1), v
        # lengths not in integral ratio: fall through to truncation
    n = min(len(b), len(v))
    return b[:n], v[:n]


def classify_significance(
    baseline: RoiSeries,
    valence: RoiSeries,
    sensitivity_threshold: float = DEFAULT_SENSITIVITY_C,
    pairing: PairingPolicy = PairingPolicy.BLOCK,
) -> TestReport:
    """Run the normality-gated paired test and apply the technical gate.

    The technical gate (|delta| >= sensitivity_threshold) applies to
    temperature only; perfusion verdicts are purely statistical.
    """
    if baseline.quantity is not valence.quantity:
        raise PairingError("cannot compare series of different quantities")
    b, v = pair_series(baseline.values, valence.values, pairing)
    d = v - b
    delta = float(valence.values.mean() - baseline.values.mean())
    is_temp = baseline.quantity is Quantity.TEMPERATURE
    technical = (abs(delta) >= sensitivity_threshold) if is_temp else True

    def degenerate(msg: str) -> TestReport:
        return TestReport(
            test_used=None, statistic=math.nan, p_value=math.nan,
            n_pairs=len(d), normality_p=math.nan,
            significance=Significance.NONE,
            technically_significant=technical, delta_abs=delta,
            pairing_policy=pairing, diagnostic=msg,
        )

    if np.all(d == 0.0):
        return degenerate("identical paired series; no test applicable")

    try:
        normality_p = ks_normality(d)
    except (DegenerateSampleError, InvalidInputError):
        normality_p = math.nan

    if not math.isnan(normality_p) and normality_p >= NORMALITY_ALPHA:
        try:
            stat, p, _ = paired_t(b, v)
            kind = TestKind.T_PAIRED
        except DegenerateSampleError:
            return degenerate("constant nonzero differences; t test degenerate")
    else:
        try:
            stat, p = wilcoxon_signed_rank(b, v)
            kind = TestKind.WILCOXON
        except DegenerateSampleError as exc:
            return degenerate(str(exc))

    if p < 0.001:
        sig = Significance.P001
    elif p < 0.05:
        sig = Significance.P05
    else:
        sig = Significance.NONE
    return TestReport(
        test_used=kind, statistic=float(stat), p_value=float(p),
        n_pairs=len(d), normality_p=float(normality_p),
        significance=sig, technically_significant=technical,
        delta_abs=delta, pairing_policy=pairing,
    )
