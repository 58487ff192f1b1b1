"""Sliding-window change statistic, matched filtering, and peak detection.

The change statistic at time t is the two-sample transport statistic between
the beta samples before t and the beta samples after t (t itself excluded),
averaged over dimensions. Convolving that trace with a simulation-calibrated
unit-area filter suppresses spurious maxima; change points are the strict
local maxima of the filtered trace above a threshold.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .empirical import NULL, _w2t_from_sorted
from .errors import NumericalError
from .series import TimeSeries
from .simgen import DistSpec, SeriesSpec, generate

__all__ = [
    "StatTrace",
    "MatchedFilter",
    "DetectorConfig",
    "DetectionResult",
    "DEFAULT_CHANGE_PAIRS",
    "sliding_statistic",
    "estimate_matched_filter",
    "apply_filter",
    "detect_peaks",
    "detect",
    "OnlineDetector",
    "save_filter",
    "load_filter",
]

# Calibration pairs: a mean shift, a variance bump (second parameter of the
# normal family read as a variance, so sd = sqrt(1.2)), and a same-variance
# heavy-tailed alternative.
DEFAULT_CHANGE_PAIRS = (
    (DistSpec("normal", 0.0, 1.0), DistSpec("normal", 0.2, 1.0)),
    (DistSpec("normal", 0.0, 1.0), DistSpec("normal", 0.0, float(np.sqrt(1.2)))),
    (DistSpec("normal", 0.0, 1.0), DistSpec("laplace", 0.0, float(1.0 / np.sqrt(2.0)))),
)

FILTER_FORMAT = "wcpd.matched-filter"
FILTER_VERSION = 1

_UNIT_AREA_TOL = 1e-9


@dataclass(frozen=True)
class StatTrace:
    """Per-index change statistic; warm-up entries are flagged with NaN.

    Indices t < beta and t >= T - beta lack a full window and stay NaN. The
    ``filtered`` flag records whether the matched filter has been applied.
    """

    values: np.ndarray
    beta: int
    filtered: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("trace values must be a nonempty flat array")
        if self.beta < 1:
            raise ValueError("beta must be at least 1")
        head = values[: self.beta]
        tail = values[values.size - self.beta :]
        if not (np.isnan(head).all() and np.isnan(tail).all()):
            raise ValueError("warm-up regions must be flagged invalid")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def valid_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def valid_range(self) -> tuple[int, int]:
        """Inclusive (first, last) index with a fully supported window."""
        return self.beta, len(self) - self.beta - 1


@dataclass(frozen=True)
class MatchedFilter:
    """Unit-area taps over offsets -beta..beta plus estimation provenance."""

    taps: np.ndarray
    beta: int
    gamma: float
    ensemble_size: int
    source: str = "estimated"
    change_pairs: tuple = ()
    seed: int | None = None

    def __post_init__(self):
        taps = np.array(self.taps, dtype=float)
        if self.beta < 1:
            raise ValueError("beta must be at least 1")
        if taps.ndim != 1 or taps.size != 2 * self.beta + 1:
            raise ValueError("taps must cover offsets -beta..beta")
        if not np.all(np.isfinite(taps)):
            raise ValueError("non-finite tap")
        if abs(float(taps.sum()) - 1.0) > _UNIT_AREA_TOL:
            raise ValueError("filter taps must have unit area")
        if self.source not in ("estimated", "loaded"):
            raise ValueError("source must be 'estimated' or 'loaded'")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)


@dataclass(frozen=True)
class DetectorConfig:
    """Knobs of the detection pipeline."""

    beta: int
    lam: float = NULL.reject_threshold_05
    filter: MatchedFilter | None = None
    dimension_reduce: str = "mean"

    def __post_init__(self):
        if self.beta < 2:
            raise ValueError("beta must be at least 2")
        if not np.isfinite(self.lam):
            raise ValueError("threshold must be finite")
        if self.dimension_reduce != "mean":
            raise ValueError("only mean dimension reduction is supported")
        if self.filter is not None and self.filter.beta != self.beta:
            raise ValueError("filter window size does not match beta")


@dataclass(frozen=True)
class DetectionResult:
    change_points: list[int]
    raw: StatTrace
    filtered: StatTrace | None


class _SlidingW2T:
    """Scalar sliding statistic over incrementally maintained sorted windows.

    Each new sample shifts the center by one: the entering and leaving values
    are spliced into the sorted before/after windows, so a step costs O(beta)
    instead of a fresh sort.
    """

    def __init__(self, beta: int):
        self._beta = beta
        self._recent: deque[float] = deque(maxlen=2 * beta + 2)
        self._count = 0
        self._before: np.ndarray | None = None
        self._after: np.ndarray | None = None

    @staticmethod
    def _evict_insert(window: np.ndarray, old: float, new: float) -> np.ndarray:
        idx = int(np.searchsorted(window, old, side="left"))
        window = np.delete(window, idx)
        jdx = int(np.searchsorted(window, new))
        return np.insert(window, jdx, new)

    def feed(self, x: float) -> float | None:
        beta = self._beta
        self._recent.append(x)
        s = self._count
        self._count += 1
        if s < 2 * beta:
            return None
        if s == 2 * beta:
            buf = np.array(self._recent)  # samples 0..2*beta
            self._before = np.sort(buf[:beta])
            self._after = np.sort(buf[beta + 1 :])
        else:
            base = s - 2 * beta - 1  # oldest retained sample index
            enter_before = self._recent[(s - beta - 1) - base]
            leave_before = self._recent[0]
            leave_after = self._recent[(s - beta) - base]
            self._before = self._evict_insert(self._before, leave_before, enter_before)
            self._after = self._evict_insert(self._after, leave_after, x)
        return _w2t_from_sorted(self._before, self._after)


class _SlidingStack:
    """Vector wrapper: one scalar window per dimension, averaged per step."""

    def __init__(self, beta: int, dim: int):
        self._workers = [_SlidingW2T(beta) for _ in range(dim)]

    def feed(self, sample: np.ndarray) -> float | None:
        outs = [w.feed(float(sample[d])) for d, w in enumerate(self._workers)]
        if outs[0] is None:
            return None
        return float(np.mean(outs))


def sliding_statistic(series: TimeSeries, beta: int) -> StatTrace:
    """Per-index change statistic over windows of beta samples on each side.

    The before window holds X[t-beta..t-1] and the after window X[t+1..t+beta];
    the sample at t belongs to neither. For d > 1 the per-dimension statistics
    are averaged.
    """
    if beta < 1:
        raise ValueError("beta must be at least 1")
    T = len(series)
    if T < 2 * beta + 1:
        raise ValueError("series too short for window")
    values = np.full(T, np.nan)
    stack = _SlidingStack(beta, series.dim)
    data = series.data
    for s in range(T):
        out = stack.feed(data[s])
        if out is not None:
            values[s - beta] = out
    return StatTrace(values, beta, filtered=False)


def _derive_seed(seed: int, pair_index: int, member: int) -> int:
    return int(
        np.random.SeedSequence([seed, pair_index, member]).generate_state(1, np.uint64)[0]
    )


def _taps_from_signature(mean_signature: np.ndarray) -> tuple[np.ndarray, float]:
    """Debias, clamp, trim, and unit-normalize an averaged signature."""
    taps = np.maximum(mean_signature - NULL.null_mean, 0.0)
    taps[0] = 0.0
    taps[-1] = 0.0
    gamma = float(taps.sum())
    if gamma <= 0.0:
        raise NumericalError("filter estimation failed: no signal above null mean")
    return taps / gamma, gamma


def estimate_matched_filter(
    beta: int,
    ensemble_size: int,
    change_pairs=DEFAULT_CHANGE_PAIRS,
    seed: int = 0,
) -> MatchedFilter:
    """Estimate the change-point signature from simulated ensembles.

    Each ensemble member is a single-change sequence of length 4*beta + 1 with
    the switch at the center; its statistic trace, sampled at offsets
    -beta..beta around the change, is averaged over members and pairs. The
    mean profile is debiased by the null mean, clamped at zero, zeroed at the
    extreme offsets (the windows there straddle no mixed samples, and a zero
    leading tap keeps the online confirmation delay at 2*beta), and scaled by
    gamma so the taps sum to one.
    """
    if beta < 2:
        raise ValueError("beta must be at least 2")
    if ensemble_size < 1:
        raise ValueError("ensemble size must be at least 1")
    change_pairs = tuple(change_pairs)
    if not change_pairs:
        raise ValueError("at least one change pair is required")
    if seed < 0:
        raise ValueError("seed must be nonnegative")

    accum = np.zeros(2 * beta + 1)
    for pair_index, (before_spec, after_spec) in enumerate(change_pairs):
        for member in range(ensemble_size):
            member_series = generate(
                SeriesSpec(
                    segments=((before_spec, 2 * beta), (after_spec, 2 * beta + 1)),
                    dimension=1,
                    seed=_derive_seed(seed, pair_index, member),
                )
            )
            trace = sliding_statistic(member_series, beta)
            # change point sits at index 2*beta; offsets -beta..beta are all valid
            accum += trace.values[beta : 3 * beta + 1]
    mean_signature = accum / (len(change_pairs) * ensemble_size)
    taps, gamma = _taps_from_signature(mean_signature)
    return MatchedFilter(
        taps=taps,
        beta=beta,
        gamma=gamma,
        ensemble_size=ensemble_size,
        source="estimated",
        change_pairs=change_pairs,
        seed=seed,
    )


def _response(rev_taps: np.ndarray, segment: np.ndarray) -> float:
    # out[t] = sum_k taps[k] * sigma[t - k] over offsets k in -beta..beta
    return float(np.dot(rev_taps, segment))


def apply_filter(trace: StatTrace, filt: MatchedFilter) -> StatTrace:
    """Same-length convolution of the trace with the filter taps.

    Warm-up entries feeding a window are padded with the null mean 0.166, the
    statistic's resting level, so edges do not fabricate peaks.
    """
    if trace.filtered:
        raise ValueError("trace is already filtered")
    if filt.beta != trace.beta:
        raise ValueError("filter window size does not match the trace")
    T = len(trace)
    beta = trace.beta
    padded = np.where(np.isnan(trace.values), NULL.null_mean, trace.values)
    rev = filt.taps[::-1].copy()
    out = np.full(T, np.nan)
    for t in range(beta, T - beta):
        out[t] = _response(rev, padded[t - beta : t + beta + 1])
    return StatTrace(out, beta, filtered=True)


def detect_peaks(trace: StatTrace, lam: float) -> list[int]:
    """Strict local maxima above lam with both neighbors valid."""
    vals = trace.values
    out: list[int] = []
    for t in range(1, len(vals) - 1):
        left, mid, right = vals[t - 1], vals[t], vals[t + 1]
        if np.isnan(left) or np.isnan(mid) or np.isnan(right):
            continue
        if mid > left and mid > right and mid > lam:
            out.append(t)
    return out


def detect(series: TimeSeries, config: DetectorConfig) -> DetectionResult:
    """Full offline pass: statistic, optional filtering, peak extraction."""
    raw = sliding_statistic(series, config.beta)
    if config.filter is not None:
        filtered = apply_filter(raw, config.filter)
        peaks = detect_peaks(filtered, config.lam)
    else:
        filtered = None
        peaks = detect_peaks(raw, config.lam)
    return DetectionResult(change_points=peaks, raw=raw, filtered=filtered)


class OnlineDetector:
    """Streaming twin of :func:`detect`; push samples, collect confirmations.

    A change at index t needs the forward statistic window (beta samples) and
    the filter's forward support (beta more) before its peak can be judged, so
    with an estimated filter (zero leading tap) the confirmation arrives
    exactly when sample t + 2*beta does. A loaded filter with a nonzero
    leading tap needs one more sample. :meth:`finalize` flushes the decisions
    the offline pass makes near the end of the stream with padding, so
    streamed plus flushed indices always equal the offline result.
    """

    def __init__(self, config: DetectorConfig):
        self._config = config
        beta = config.beta
        if config.filter is not None:
            taps = config.filter.taps
        else:
            taps = np.zeros(2 * beta + 1)
            taps[beta] = 1.0  # identity: peaks come straight from the raw trace
        self._rev = taps[::-1].copy()
        self._lead_zero = taps[0] == 0.0
        self._beta = beta
        self._stack: _SlidingStack | None = None
        self._dim: int | None = None
        self._n = 0
        self._sigma: list[float] = []  # sigma[beta + i] for i in range(len)
        self._filt: list[float] = []  # filtered[beta + i] for i in range(len)
        self._next_check = beta + 1
        self._last_emitted = -1
        self._finalized = False

    def _sigma_hi(self) -> int:
        return self._beta + len(self._sigma) - 1

    def _filter_value(self, t: int) -> float:
        beta = self._beta
        lo = t - beta
        segment = np.full(2 * beta + 1, NULL.null_mean)
        src_lo = max(lo, beta)
        src_hi = min(t + beta, self._sigma_hi())
        if src_hi >= src_lo:
            segment[src_lo - lo : src_hi - lo + 1] = self._sigma[
                src_lo - beta : src_hi - beta + 1
            ]
        return _response(self._rev, segment)

    def _peak_at(self, t: int) -> bool:
        base = self._beta
        left = self._filt[t - 1 - base]
        mid = self._filt[t - base]
        right = self._filt[t + 1 - base]
        return mid > left and mid > right and mid > self._config.lam

    def _extend_filtered(self, available_hi: int) -> None:
        beta = self._beta
        while True:
            t = beta + len(self._filt)
            if t > available_hi:
                break
            self._filt.append(self._filter_value(t))

    def _drain(self, decide_hi: int) -> list[int]:
        emitted: list[int] = []
        while self._next_check <= decide_hi:
            t = self._next_check
            self._next_check += 1
            if t < self._beta + 1:
                continue
            if self._peak_at(t) and t > self._last_emitted:
                self._last_emitted = t
                emitted.append(t)
        return emitted

    def step(self, sample) -> int | None:
        """Feed one sample; returns a confirmed change point index or None."""
        if self._finalized:
            raise ValueError("finalized detector cannot accept more samples")
        arr = np.atleast_1d(np.asarray(sample, dtype=float))
        if arr.ndim != 1:
            raise ValueError("sample must be a flat vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite sample")
        if self._stack is None:
            self._dim = arr.size
            self._stack = _SlidingStack(self._beta, arr.size)
        elif arr.size != self._dim:
            raise ValueError("sample dimension changed mid-stream")
        self._n += 1

        out = self._stack.feed(arr)
        if out is not None:
            self._sigma.append(out)
        if not self._sigma:
            return None

        beta = self._beta
        # filtered[t] is final once every nonzero tap sees a real statistic;
        # a zero leading tap lets the frontier value in one sample earlier
        slack = 1 if self._lead_zero else 0
        self._extend_filtered(self._sigma_hi() - beta + slack)
        decide_hi = beta + len(self._filt) - 2  # the right neighbor must exist
        emitted = self._drain(decide_hi)
        return emitted[0] if emitted else None

    def finalize(self) -> list[int]:
        """Flush end-of-stream decisions (offline uses padding there)."""
        if self._finalized:
            raise ValueError("detector already finalized")
        self._finalized = True
        T = self._n
        beta = self._beta
        if not self._sigma or T < 2 * beta + 1:
            return []
        self._extend_filtered(T - beta - 1)
        return self._drain(T - beta - 2)


def save_filter(filt: MatchedFilter, path) -> None:
    """Write the filter as versioned JSON with full-precision taps."""
    payload = {
        "format": FILTER_FORMAT,
        "version": FILTER_VERSION,
        "beta": filt.beta,
        "gamma": filt.gamma,
        "ensemble_size": filt.ensemble_size,
        "seed": filt.seed,
        "change_pairs": [
            [asdict(before), asdict(after)] for before, after in filt.change_pairs
        ],
        "taps": [float(tap) for tap in filt.taps],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_filter(path) -> MatchedFilter:
    """Load a saved filter; the unit-area invariant is re-validated."""
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not a valid filter file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != FILTER_FORMAT:
        raise ValueError(f"{path}: not a matched filter file")
    if payload.get("version") != FILTER_VERSION:
        raise ValueError(f"{path}: unsupported filter version {payload.get('version')!r}")
    pairs = tuple(
        (DistSpec(**before), DistSpec(**after))
        for before, after in payload.get("change_pairs", [])
    )
    return MatchedFilter(
        taps=np.asarray(payload["taps"], dtype=float),
        beta=int(payload["beta"]),
        gamma=float(payload["gamma"]),
        ensemble_size=int(payload["ensemble_size"]),
        source="loaded",
        change_pairs=pairs,
        seed=payload.get("seed"),
    )
