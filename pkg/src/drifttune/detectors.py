"""Five chunk-level drift detectors behind one statistic/threshold contract.

Every detector consumes one error-rate value per update, exposes a
non-negative dissimilarity statistic, and alarms exactly when that statistic
strictly exceeds its threshold. Thresholds are plain mutable attributes so a
controller can reassign them without touching detector history.

DDM and both HDDM variants use variance- or Hoeffding-style bounds whose
width depends on how many observations back each fed value. Their
``samples_per_update`` parameter declares how many underlying instances one
update summarizes (1 for raw values, the chunk size for chunk error rates),
which keeps the bounds on the instance scale; the statistic formulas reduce
to the plain single-observation forms at the default of 1. PH and KSWIN are
scale-free in this sense and take no such parameter.
"""

from __future__ import annotations

import copy as _copy
import math
from collections import deque
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ConfigError, DetectorError

DETECTOR_KINDS = ("ddm", "ph", "kswin", "hddm_a", "hddm_w")


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance: max gap between empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise DetectorError("ks_distance needs two non-empty samples")
    values = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, values, side="right") / a.size
    cdf_b = np.searchsorted(b, values, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def _require_positive(params, names) -> None:
    for name in names:
        if getattr(params, name) <= 0:
            raise ConfigError(f"{type(params).__name__}.{name} must be positive")


@dataclass(frozen=True)
class DdmParams:
    threshold: float = 3.0
    min_samples: int = 2
    samples_per_update: int = 1

    def __post_init__(self):
        _require_positive(self, ("min_samples", "samples_per_update"))


@dataclass(frozen=True)
class PhParams:
    threshold: float = 0.1
    delta: float = 0.005

    def __post_init__(self):
        _require_positive(self, ("delta",))


@dataclass(frozen=True)
class KswinParams:
    # threshold default is sqrt(-ln(alpha) / recent), filled in post-init
    threshold: float | None = None
    window: int = 100
    recent: int = 30
    alpha: float = 0.005
    seed: int = 0

    def __post_init__(self):
        _require_positive(self, ("window", "recent", "alpha"))
        if not self.alpha < 1.0:
            raise ConfigError("KswinParams.alpha must lie in (0, 1)")
        if self.recent >= self.window:
            raise ConfigError("KswinParams.recent must be smaller than window")
        if self.recent > self.window - self.recent:
            raise ConfigError("KswinParams.recent cannot exceed the older remainder of the window")
        if self.seed < 0:
            raise ConfigError("KswinParams.seed must be non-negative")
        if self.threshold is None:
            object.__setattr__(self, "threshold", math.sqrt(-math.log(self.alpha) / self.recent))


@dataclass(frozen=True)
class HddmAParams:
    threshold: float = 1.0
    alpha: float = 0.001
    samples_per_update: int = 1

    def __post_init__(self):
        _require_positive(self, ("alpha", "samples_per_update"))
        if not self.alpha < 1.0:
            raise ConfigError("HddmAParams.alpha must lie in (0, 1)")


@dataclass(frozen=True)
class HddmWParams:
    threshold: float = 1.0
    ewma_weight: float = 0.05
    alpha: float = 0.005
    samples_per_update: int = 1

    def __post_init__(self):
        _require_positive(self, ("ewma_weight", "alpha", "samples_per_update"))
        if not self.ewma_weight <= 1.0:
            raise ConfigError("HddmWParams.ewma_weight must lie in (0, 1]")
        if not self.alpha < 1.0:
            raise ConfigError("HddmWParams.alpha must lie in (0, 1)")


class DriftMonitor:
    """Common detector plumbing: validation, threshold, clone/fresh/reset."""

    kind = "base"

    def __init__(self, params):
        self.params = params
        self._threshold = float(params.threshold)
        self._statistic = 0.0
        self._init_state()

    def _init_state(self) -> None:
        raise NotImplementedError

    def _consume(self, value: float) -> float:
        raise NotImplementedError

    @property
    def statistic(self) -> float:
        return self._statistic

    @property
    def threshold(self) -> float:
        return self._threshold

    @threshold.setter
    def threshold(self, value: float) -> None:
        value = float(value)
        # +inf is a legitimate never-alarm setting; NaN would make the alarm
        # predicate silently constant-false, so it is rejected.
        if math.isnan(value):
            raise DetectorError("threshold must not be NaN")
        self._threshold = value

    @property
    def alarm(self) -> bool:
        return self._statistic > self._threshold

    def update(self, error_rate: float) -> float:
        value = float(error_rate)
        if not math.isfinite(value) or not 0.0 <= value <= 1.0:
            raise DetectorError(f"error rate must lie in [0, 1], got {error_rate!r}")
        self._statistic = self._consume(value)
        return self._statistic

    def reset(self) -> None:
        """Clear history and statistic; the threshold is kept."""
        self._statistic = 0.0
        self._init_state()

    def clone(self) -> "DriftMonitor":
        return _copy.deepcopy(self)

    def fresh(self) -> "DriftMonitor":
        """New detector of the same kind and constructor parameters."""
        return type(self)(self.params)


class Ddm(DriftMonitor):
    """Error-rate mean plus binomial deviation, scored against its minimum.

    Statistic is the excess of p + s over the historical minimum, in units
    of the deviation recorded at that minimum.
    """

    kind = "ddm"

    def __init__(self, params: DdmParams | None = None):
        super().__init__(params or DdmParams())

    def _init_state(self):
        self._count = 0
        self._total = 0.0
        self._min_sum = math.inf
        self._min_dev = 0.0

    def _consume(self, value):
        self._count += 1
        self._total += value
        p = self._total / self._count
        s = math.sqrt(p * (1.0 - p) / (self._count * self.params.samples_per_update))
        if p + s < self._min_sum:
            self._min_sum = p + s
            self._min_dev = s
        if self._count < self.params.min_samples or self._min_dev <= 0.0:
            return 0.0
        return max(0.0, (p + s - self._min_sum) / self._min_dev)


class PageHinkley(DriftMonitor):
    """Cumulative positive deviation of the input above its running mean."""

    kind = "ph"

    def __init__(self, params: PhParams | None = None):
        super().__init__(params or PhParams())

    def _init_state(self):
        self._count = 0
        self._mean = 0.0
        self._cum = 0.0
        self._cum_min = math.inf

    def _consume(self, value):
        self._count += 1
        self._mean += (value - self._mean) / self._count
        self._cum += value - self._mean - self.params.delta
        self._cum_min = min(self._cum_min, self._cum)
        return max(0.0, self._cum - self._cum_min)


class Kswin(DriftMonitor):
    """KS distance between the newest window values and older ones.

    Once the window holds ``window`` values, the newest ``recent`` are
    compared against an equally sized subsample drawn without replacement
    from the remainder; the subsample PRNG is seeded so runs repeat exactly.
    """

    kind = "kswin"

    def __init__(self, params: KswinParams | None = None):
        super().__init__(params or KswinParams())

    def _init_state(self):
        self._window = deque(maxlen=self.params.window)
        self._rng = np.random.Generator(np.random.PCG64(self.params.seed))

    def _consume(self, value):
        self._window.append(value)
        if len(self._window) < self.params.window:
            return 0.0
        arr = np.asarray(self._window, dtype=np.float64)
        older = arr[: -self.params.recent]
        recent = arr[-self.params.recent :]
        sample = self._rng.choice(older, size=self.params.recent, replace=False)
        return ks_distance(sample, recent)


class HddmA(DriftMonitor):
    """Hoeffding test between the best historical prefix and what follows.

    The cut is the prefix minimizing mean + bound; the statistic is the
    post-cut/pre-cut mean difference over the two-sample Hoeffding bound, so
    1.0 marks the bound itself.
    """

    kind = "hddm_a"

    def __init__(self, params: HddmAParams | None = None):
        super().__init__(params or HddmAParams())

    def _init_state(self):
        self._count = 0
        self._total = 0.0
        self._cut_count = 0
        self._cut_total = 0.0
        self._cut_score = math.inf

    def _consume(self, value):
        m = self.params.samples_per_update
        log_term = math.log(1.0 / self.params.alpha)
        self._count += 1
        self._total += value
        mean = self._total / self._count
        bound = math.sqrt(log_term / (2.0 * self._count * m))
        if mean + bound < self._cut_score:
            self._cut_score = mean + bound
            self._cut_count = self._count
            self._cut_total = self._total
        n1 = self._cut_count
        n2 = self._count - self._cut_count
        if n1 < 1 or n2 < 1:
            return 0.0
        mu1 = self._cut_total / n1
        mu2 = (self._total - self._cut_total) / n2
        eps = math.sqrt((log_term / 2.0) * (1.0 / (n1 * m) + 1.0 / (n2 * m)))
        return max(0.0, (mu2 - mu1) / eps)


class HddmW(DriftMonitor):
    """EWMA of the input scored against its historical minimum.

    The scale is the McDiarmid-style bound for an EWMA with the configured
    weight, so 1.0 again marks the bound.
    """

    kind = "hddm_w"

    def __init__(self, params: HddmWParams | None = None):
        super().__init__(params or HddmWParams())

    def _init_state(self):
        self._ewma = None
        self._ewma_min = math.inf

    def _consume(self, value):
        lam = self.params.ewma_weight
        if self._ewma is None:
            self._ewma = value
        else:
            self._ewma = (1.0 - lam) * self._ewma + lam * value
        self._ewma_min = min(self._ewma_min, self._ewma)
        eps = math.sqrt(
            (lam / (2.0 - lam)) * math.log(1.0 / self.params.alpha) / (2.0 * self.params.samples_per_update)
        )
        return max(0.0, (self._ewma - self._ewma_min) / eps)


PARAM_TYPES = {
    "ddm": DdmParams,
    "ph": PhParams,
    "kswin": KswinParams,
    "hddm_a": HddmAParams,
    "hddm_w": HddmWParams,
}

MONITOR_TYPES = {
    "ddm": Ddm,
    "ph": PageHinkley,
    "kswin": Kswin,
    "hddm_a": HddmA,
    "hddm_w": HddmW,
}


def params_from_dict(kind: str, mapping: dict | None = None):
    """Build a params dataclass for ``kind`` from a plain mapping."""
    if kind not in PARAM_TYPES:
        raise ConfigError(f"unknown detector kind {kind!r}, expected one of {DETECTOR_KINDS}")
    cls = PARAM_TYPES[kind]
    mapping = dict(mapping or {})
    known = {f.name for f in fields(cls)}
    unknown = set(mapping) - known
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    try:
        return cls(**mapping)
    except TypeError as exc:
        raise ConfigError(f"bad {cls.__name__}: {exc}") from exc


def params_to_dict(params) -> dict:
    return asdict(params)


def make_monitor(kind: str, params=None) -> DriftMonitor:
    if kind not in MONITOR_TYPES:
        raise ConfigError(f"unknown detector kind {kind!r}, expected one of {DETECTOR_KINDS}")
    if params is None:
        params = PARAM_TYPES[kind]()
    if not isinstance(params, PARAM_TYPES[kind]):
        raise ConfigError(f"{kind} expects {PARAM_TYPES[kind].__name__}, got {type(params).__name__}")
    return MONITOR_TYPES[kind](params)
