"""Payoff catalog, exact chaos coefficients, and seeded Monte Carlo experiments.

Terminal payoffs f(W_T) get their one-step Hermite coefficients by quadrature
(smooth f) or closed-form half-line integrals (digitals); the grid expansion
is the exact refinement of the one-step one.  Path sampling uses the
counter-based Philox generator in fixed-size blocks so results are bit-stable
regardless of how blocks are distributed over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import clark_ocone, hermite, multiindex as mi
from .chaos import ChaosExpansion, GridSpec, evaluate
from .clark_ocone import RateReport, err_tail, rate_report
from .multiindex import MultiIndex

#: per-block sample count for counter-based generation
SAMPLE_BLOCK = 4096
#: default truncation degree for digital expansions; d_k decays like k^{-3/4}
DIGITAL_DEFAULT_DEGREE = 20
#: quadrature margin beyond polynomial exactness for smooth integrands
QUAD_EXTRA_ORDER = 8


@dataclass(frozen=True)
class PolynomialPayoff:
    """f(W_T) = sum_k coeffs[k] * W_T^k."""

    coeffs: Tuple[float, ...]

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coeffs)

    @property
    def degree(self) -> int:
        nz = [k for k, c in enumerate(self.coeffs) if c != 0.0]
        return max(nz, default=0)

    def derivative(self) -> "PolynomialPayoff":
        der = np.polynomial.polynomial.polyder(np.asarray(self.coeffs, dtype=float))
        return PolynomialPayoff(tuple(der) if der.size else (0.0,))


@dataclass(frozen=True)
class SmoothPayoff:
    """Smooth terminal payoff with an explicit first derivative."""

    f: Callable
    df: Callable
    name: str = "smooth"


@dataclass(frozen=True)
class DigitalPayoff:
    """Indicator payoff 1_{[K, infinity)}(W_T)."""

    strike: float

    def __call__(self, x):
        return (np.asarray(x, dtype=float) >= self.strike).astype(float)


@dataclass(frozen=True)
class OccupationTimePayoff:
    """Time spent non-negative on the grid: sum_i 1_{[0,inf)}(W_{t_i}) T/N."""


TerminalPayoff = Union[PolynomialPayoff, SmoothPayoff, DigitalPayoff]
Payoff = Union[TerminalPayoff, OccupationTimePayoff]


def hermite_expand_terminal(
    f: Union[Callable, TerminalPayoff], T: float, max_degree: int
) -> np.ndarray:
    """One-step coefficients d_k = E[f(sqrt(T) Z) H_k(Z)], k = 0..max_degree.

    Digitals use the closed-form half-line integrals with threshold K/sqrt(T);
    everything else goes through Gauss quadrature against the normal weight.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    if isinstance(f, DigitalPayoff):
        threshold = f.strike / math.sqrt(T)
        return np.array(
            [hermite.hermite_indicator_integral(k, threshold) for k in range(max_degree + 1)]
        )
    func = f.f if isinstance(f, SmoothPayoff) else f
    if isinstance(f, PolynomialPayoff):
        if f.degree == 0:
            d = np.zeros(max_degree + 1)
            d[0] = f.coeffs[0]
            return d
        order = (f.degree + max_degree) // 2 + 1
    else:
        order = max_degree + QUAD_EXTRA_ORDER
    rule = hermite.gauss_hermite_rule(order)
    values = np.asarray(func(math.sqrt(T) * rule.nodes), dtype=float)
    table = hermite.eval_all(max_degree, rule.nodes)
    d = table @ (rule.weights * values)
    if not np.all(np.isfinite(d)):
        raise ArithmeticError("non-finite quadrature result in terminal expansion")
    return d


def coeffs_terminal(
    payoff: TerminalPayoff, grid: GridSpec, max_degree: int
) -> ChaosExpansion:
    """Grid expansion of f(W_T): exact refinement of the one-step coefficients.

    c_{a'} = d_{|a'|} sqrt(|a'|!/a'!) N^{-|a'|/2} over all indexes of degree
    up to max_degree.
    """
    d = hermite_expand_terminal(payoff, grid.T, max_degree)
    coeffs: Dict[MultiIndex, float] = {}
    for a in mi.enumerate_upto(grid.N, max_degree):
        m = sum(a)
        if abs(d[m]) <= 0.0:
            continue
        log_ratio = 0.5 * (math.lgamma(m + 1) - mi.log_factorial(a))
        coeffs[a] = d[m] * math.exp(log_ratio - 0.5 * m * math.log(grid.N))
    return ChaosExpansion(grid, coeffs)


def coeffs_occupation_time(grid: GridSpec, max_degree: int) -> ChaosExpansion:
    """Grid expansion of the occupation-time functional.

    Each time step contributes a digital at horizon t_i expanded on the first
    i slots; the coefficient at a' is (T/N) d_{|a'|} sqrt(|a'|!/a'!) times
    sum over i >= last slot of a' of i^{-|a'|/2}.
    """
    d = hermite_expand_terminal(DigitalPayoff(0.0), 1.0, max_degree)
    tail_sums = _inverse_power_tail_sums(grid.N, max_degree)
    coeffs: Dict[MultiIndex, float] = {(): grid.T / 2.0}
    for a in mi.enumerate_upto(grid.N, max_degree):
        if not a:
            continue
        m = sum(a)
        if d[m] == 0.0:
            continue
        ell = len(a)
        log_ratio = 0.5 * (math.lgamma(m + 1) - mi.log_factorial(a))
        coeffs[a] = grid.dt * d[m] * math.exp(log_ratio) * tail_sums[m][ell - 1]
    return ChaosExpansion(grid, coeffs)


def _inverse_power_tail_sums(n: int, max_degree: int) -> Dict[int, np.ndarray]:
    """tail_sums[m][l-1] = sum_{i=l}^{n} i^{-m/2} for m = 1..max_degree."""
    i = np.arange(1, n + 1, dtype=float)
    out = {}
    for m in range(1, max_degree + 1):
        powers = i ** (-m / 2.0)
        out[m] = np.cumsum(powers[::-1])[::-1]
    return out


def occupation_error_norm(grid: GridSpec, n: int, max_degree: int) -> float:
    """Order-n error norm of the truncated occupation-time expansion.

    Sums squared coefficients with last entry above n without materializing
    the index set: for degree m and last slot l the coefficients with last
    entry k share the factor C(m,k) (l-1)^{m-k} after the m!/a'! reduction.
    """
    if n < 1:
        raise ValueError("error order n must be >= 1")
    d = hermite_expand_terminal(DigitalPayoff(0.0), 1.0, max_degree)
    tail_sums = _inverse_power_tail_sums(grid.N, max_degree)
    total = 0.0
    for m in range(n + 1, max_degree + 1):
        if d[m] == 0.0:
            continue
        per_slot = 0.0
        for ell in range(1, grid.N + 1):
            combinatorial = sum(
                math.comb(m, k) * float(ell - 1) ** (m - k) for k in range(n + 1, m + 1)
            )
            per_slot += tail_sums[m][ell - 1] ** 2 * combinatorial
        total += d[m] ** 2 * per_slot
    return grid.dt * math.sqrt(total)


# ---------------------------------------------------------------------------
# Path sampling


@dataclass(frozen=True)
class PathBatch:
    """Standardized increments xi with bit-reproducible regeneration."""

    grid: GridSpec
    increments: np.ndarray  # (n_samples, N)
    seed: int

    @property
    def n_samples(self) -> int:
        return self.increments.shape[0]

    def brownian_paths(self) -> np.ndarray:
        """Cumulative W_{t_1}..W_{t_N} per sample."""
        return np.cumsum(math.sqrt(self.grid.dt) * self.increments, axis=1)


def _sample_block(seed: int, block: int, rows: int, cols: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=seed).jumped(block))
    return rng.standard_normal((rows, cols))


def sample_paths(
    grid: GridSpec, n_samples: int, seed: int, workers: int = 1
) -> PathBatch:
    """Deterministic batch of standardized normal increments.

    Generation happens in fixed SAMPLE_BLOCK-row blocks keyed by (seed, block
    index) and assembled in block order, so the result is independent of the
    worker count.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n_blocks = (n_samples + SAMPLE_BLOCK - 1) // SAMPLE_BLOCK
    sizes = [
        min(SAMPLE_BLOCK, n_samples - b * SAMPLE_BLOCK) for b in range(n_blocks)
    ]
    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(
                pool.map(
                    lambda b: _sample_block(seed, b, sizes[b], grid.N),
                    range(n_blocks),
                )
            )
    else:
        blocks = [_sample_block(seed, b, sizes[b], grid.N) for b in range(n_blocks)]
    return PathBatch(grid, np.vstack(blocks), seed)


# ---------------------------------------------------------------------------
# Monte Carlo estimators


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_error: float


def _l2_of_samples(values: np.ndarray) -> McEstimate:
    """sqrt(mean of squares) with a delta-method standard error."""
    sq = values * values
    mean_sq = float(np.mean(sq))
    se_mean = float(np.std(sq, ddof=1)) / math.sqrt(len(sq)) if len(sq) > 1 else 0.0
    l2 = math.sqrt(mean_sq)
    se = se_mean / (2.0 * l2) if l2 > 0 else math.sqrt(se_mean)
    return McEstimate(estimate=l2, std_error=se)


def mc_err_norm(f: ChaosExpansion, n: int, batch: PathBatch) -> McEstimate:
    """Monte Carlo estimate of the order-n error norm by pathwise evaluation."""
    if batch.grid != f.grid:
        raise ValueError("path batch grid does not match the expansion grid")
    tail = err_tail(f, n)
    if not tail.coeffs:
        return McEstimate(0.0, 0.0)
    values = evaluate(tail, batch.increments)
    return _l2_of_samples(np.asarray(values))


def _conditional_delta(
    payoff: TerminalPayoff, w: np.ndarray, residual_var: float
) -> np.ndarray:
    """E[f'(W_T) | W_t = w] with residual variance T - t.

    Smooth payoffs are heat-kernel smoothed by quadrature in the residual
    variable; the digital uses the exact Gaussian density formula.
    """
    if isinstance(payoff, DigitalPayoff):
        z = (payoff.strike - w) / math.sqrt(residual_var)
        return hermite.normal_pdf(z) / math.sqrt(residual_var)
    if isinstance(payoff, PolynomialPayoff):
        dpay = payoff.derivative()
        order = dpay.degree // 2 + 1
        rule = hermite.gauss_hermite_rule(order)
        df = dpay
    else:
        rule = hermite.gauss_hermite_rule(24)
        df = payoff.df
    shifted = w[:, None] + math.sqrt(residual_var) * rule.nodes[None, :]
    return np.asarray(df(shifted)) @ rule.weights


def _terminal_value(payoff: TerminalPayoff, w_terminal: np.ndarray) -> np.ndarray:
    if isinstance(payoff, SmoothPayoff):
        return np.asarray(payoff.f(w_terminal), dtype=float)
    return np.asarray(payoff(w_terminal), dtype=float)


def tracking_error_hedge(
    payoff: TerminalPayoff, grid: GridSpec, batch: PathBatch
) -> McEstimate:
    """L2 estimate of the first-order delta-hedge tracking error.

    Pathwise residual F - E[F] - sum_l E[D_{t_l}F | F_{t_{l-1}}] dW_l with the
    conditional delta evaluated analytically at each rebalancing time.
    """
    if isinstance(payoff, OccupationTimePayoff):
        raise TypeError("tracking-error hedging requires a terminal payoff")
    if batch.grid != grid:
        raise ValueError("path batch grid does not match the requested grid")
    w = batch.brownian_paths()
    dw = math.sqrt(grid.dt) * batch.increments
    mean = float(hermite_expand_terminal(payoff, grid.T, 0)[0])
    residual = _terminal_value(payoff, w[:, -1]) - mean
    for ell in range(1, grid.N + 1):
        w_prev = w[:, ell - 2] if ell > 1 else np.zeros(batch.n_samples)
        residual_var = grid.T - (ell - 1) * grid.dt
        delta = _conditional_delta(payoff, w_prev, residual_var)
        residual = residual - delta * dw[:, ell - 1]
    return _l2_of_samples(residual)


def occupation_value(batch: PathBatch) -> np.ndarray:
    """Pathwise occupation time of [0, infinity) on the grid."""
    w = batch.brownian_paths()
    return np.sum(w >= 0.0, axis=1) * batch.grid.dt


# ---------------------------------------------------------------------------
# Rate sweeps


def rate_sweep(
    payoff: TerminalPayoff,
    n: int,
    s: float,
    r: float,
    n1_list: Sequence[int],
    n0: int,
    T: float,
    max_degree: int,
    payoff_id: Optional[str] = None,
) -> RateReport:
    """Exact refined error norms of a terminal payoff across N1 values."""
    grid = GridSpec(T, n0)
    f = coeffs_terminal(payoff, grid, max_degree)
    return rate_report(
        payoff_id or payoff_label(payoff), f, n, s, r, list(n1_list)
    )


def occupation_rate_sweep(
    n: int, n_list: Sequence[int], T: float, max_degree: int
) -> List[Tuple[int, float]]:
    """Truncated-coefficient order-n error norms of the occupation functional."""
    return [
        (n_steps, occupation_error_norm(GridSpec(T, n_steps), n, max_degree))
        for n_steps in n_list
    ]


def payoff_label(payoff: Payoff) -> str:
    if isinstance(payoff, PolynomialPayoff):
        return "poly:" + ",".join(format(c, "g") for c in payoff.coeffs)
    if isinstance(payoff, DigitalPayoff):
        return f"digital:{payoff.strike:g}"
    if isinstance(payoff, OccupationTimePayoff):
        return "occupation"
    return getattr(payoff, "name", "smooth")
