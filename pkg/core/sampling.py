"""
Monte-Carlo estimates for functions described by a FunctionSpec, including n far beyond
the exact cap. Radii are two-sided Hoeffding bounds.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np

import core.custom_logger as custom_logger
from core.config import get_config
from core.dnf import Dnf
from core.errors import CoordinateError, DimensionError, PreconditionError
from core.file_parsing import JsonReportParser
from core.generators import FunctionSpec

log = custom_logger.customLogger()

QUANTITIES = ('measure', 'influence', 'total-influence', 'dnf-error')


@dataclass(frozen=True)
class Estimate:
    value: float
    half_width: float
    samples: int
    confidence: float
    seed: int
    quantity: str = 'measure'
    spec: str = ''
    coordinate: Optional[int] = None

    def contains(self, exact: float) -> bool:
        return abs(self.value - float(exact)) <= self.half_width

    def to_dict(self) -> Dict[str, Any]:
        real = JsonReportParser.real_to_json
        return {
            'quantity': self.quantity,
            'spec': self.spec,
            'coordinate': self.coordinate,
            'value': real(self.value),
            'half_width': real(self.half_width),
            'samples': self.samples,
            'confidence': real(self.confidence),
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Estimate':
        real = JsonReportParser.real_from_json
        return cls(
            value=real(data['value']),
            half_width=real(data['half_width']),
            samples=int(data['samples']),
            confidence=real(data['confidence']),
            seed=int(data['seed']),
            quantity=data.get('quantity', 'measure'),
            spec=data.get('spec', ''),
            coordinate=data.get('coordinate'),
        )


def hoeffding_half_width(samples: int, confidence: float) -> float:
    """sqrt(ln(2 / (1 - confidence)) / (2 * samples))."""
    if samples < 1:
        raise PreconditionError(f"Need at least one sample, got {samples}")
    if not 0 < confidence < 1:
        raise PreconditionError(f"Confidence must lie in (0, 1), got {confidence}")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * samples))


def samples_for_half_width(half_width: float, confidence: float) -> int:
    """Smallest sample count whose Hoeffding radius is at most half_width."""
    if half_width <= 0:
        raise PreconditionError(f"Half-width must be positive, got {half_width}")
    return int(math.ceil(math.log(2.0 / (1.0 - confidence)) / (2.0 * half_width ** 2)))


BatchCounter = Callable[[np.random.Generator, int], int]


def _run_batches(counter: BatchCounter, samples: int, seed: int) -> int:
    """Split samples into batches with seeds spawned from seed; sum the batch counts in order."""
    settings = get_config()['sampling']
    batch_size = int(settings['batch_size'])
    sizes = [batch_size] * (samples // batch_size)
    if samples % batch_size:
        sizes.append(samples % batch_size)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(children, sizes))

    def run(job) -> int:
        child, size = job
        return counter(np.random.default_rng(child), size)

    workers = max(1, int(settings['workers']))
    if workers == 1 or len(jobs) == 1:
        return sum(run(job) for job in jobs)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(run, jobs))


def _points(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=(size, n), dtype=np.uint8).astype(bool)


def _estimate(counter: BatchCounter, samples: int, seed: int, confidence: Optional[float],
              quantity: str, spec: FunctionSpec, scale: float = 1.0,
              coordinate: Optional[int] = None) -> Estimate:
    if samples < 1:
        raise PreconditionError(f"Need at least one sample, got {samples}")
    confidence = get_config()['sampling']['confidence'] if confidence is None else confidence
    radius = hoeffding_half_width(samples, confidence)
    log.info(f"Estimating {quantity} of {spec.to_text()} with {samples} samples, seed {seed}")
    hits = _run_batches(counter, samples, seed)
    estimate = Estimate(
        value=scale * hits / samples,
        half_width=scale * radius,
        samples=samples,
        confidence=confidence,
        seed=seed,
        quantity=quantity,
        spec=spec.to_text(),
        coordinate=coordinate,
    )
    log.info(f"{quantity} of {spec.to_text()}: {estimate.value} +/- {estimate.half_width}")
    return estimate


def estimate_measure(spec: FunctionSpec, samples: int, seed: int,
                     confidence: Optional[float] = None) -> Estimate:
    n = spec.arity

    def counter(rng, size):
        return int(np.count_nonzero(spec.evaluate_points(_points(rng, size, n))))

    return _estimate(counter, samples, seed, confidence, 'measure', spec)


def estimate_influence(spec: FunctionSpec, k: int, samples: int, seed: int,
                       confidence: Optional[float] = None) -> Estimate:
    n = spec.arity
    if not 1 <= k <= n:
        raise CoordinateError(f"Coordinate {k} out of range 1..{n}")

    def counter(rng, size):
        x = _points(rng, size, n)
        flipped = x.copy()
        flipped[:, k - 1] ^= True
        return int(np.count_nonzero(spec.evaluate_points(x) != spec.evaluate_points(flipped)))

    return _estimate(counter, samples, seed, confidence, 'influence', spec, coordinate=k)


def estimate_total_influence(spec: FunctionSpec, samples: int, seed: int,
                             confidence: Optional[float] = None) -> Estimate:
    """n * Pr over uniform (x, k) that flipping x_k changes f; value and radius are both scaled by n."""
    n = spec.arity

    def counter(rng, size):
        x = _points(rng, size, n)
        ks = rng.integers(0, n, size=size)
        flipped = x.copy()
        flipped[np.arange(size), ks] ^= True
        return int(np.count_nonzero(spec.evaluate_points(x) != spec.evaluate_points(flipped)))

    return _estimate(counter, samples, seed, confidence, 'total-influence', spec, scale=float(n))


def estimate_dnf_error(spec: FunctionSpec, dnf: Dnf, samples: int, seed: int,
                       confidence: Optional[float] = None) -> Estimate:
    n = spec.arity
    if dnf.n != n:
        raise DimensionError(f"DNF has n={dnf.n} but {spec.to_text()} has n={n}")

    def counter(rng, size):
        x = _points(rng, size, n)
        return int(np.count_nonzero(spec.evaluate_points(x) != dnf.evaluate_points(x)))

    return _estimate(counter, samples, seed, confidence, 'dnf-error', spec)


def estimate(spec: FunctionSpec, quantity: str, samples: int, seed: int, k: Optional[int] = None,
             dnf: Optional[Dnf] = None, confidence: Optional[float] = None) -> Estimate:
    """Dispatch by quantity name; used by the estimate command."""
    if quantity == 'measure':
        return estimate_measure(spec, samples, seed, confidence)
    if quantity == 'influence':
        if k is None:
            raise PreconditionError("influence estimates need a coordinate")
        return estimate_influence(spec, k, samples, seed, confidence)
    if quantity == 'total-influence':
        return estimate_total_influence(spec, samples, seed, confidence)
    if quantity == 'dnf-error':
        if dnf is None:
            raise PreconditionError("dnf-error estimates need a DNF")
        return estimate_dnf_error(spec, dnf, samples, seed, confidence)
    raise PreconditionError(f"Unknown quantity '{quantity}'; expected one of {QUANTITIES}")


def calibration_hit_rate(spec: FunctionSpec, exact: float, samples: int, seeds: List[int],
                         confidence: Optional[float] = None) -> float:
    """Fraction of seeds whose measure estimate covers the exact value."""
    hits = sum(estimate_measure(spec, samples, s, confidence).contains(exact) for s in seeds)
    return hits / len(seeds)
