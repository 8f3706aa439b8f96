"""
Executable forms of the stability results for KL-prior attention: collapse to
the prior under weak content signal, sink margins and context sensitivity,
the maximum-entropy recency prior and its key-linear (ALiBi) form, and the
rank-one structure of key-only priors.
"""

import math

import numpy as np
from scipy.optimize import bisect
from scipy.special import logsumexp

from main.commons.exceptions import DomainError
from main.schemas.eot import TransportProblem
from main.schemas.theory import (
    AlibiEquivalence,
    CollapseReport,
    PerturbationCheck,
    RankReport,
    RecencyPrior,
    SensitivityCheck,
    SinkMassPoint,
)

from .eot_core import as_prob_vector, entropy, kl_prior_attention, softmax_attention


# relative slack on inequalities that hold with equality in exact arithmetic
BOUND_SLACK = 1e-12
RANK_ONE_RATIO = 1e-9
POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000
MEAN_TOL = 1e-12
NEWTON_STEPS = 5
LAMBDA_BRACKET = 50.0


def collapse_bounds(scores, prior) -> CollapseReport:
    problem = TransportProblem(scores=scores, prior=prior, temperature=1.0)
    omega = float(np.ptp(problem.scores))
    posterior = kl_prior_attention(problem)
    lower = problem.prior * math.exp(-omega)
    upper = problem.prior * math.exp(omega)
    holds = bool(
        np.all(posterior >= lower * (1 - BOUND_SLACK))
        and np.all(posterior <= upper * (1 + BOUND_SLACK)),
    )
    return CollapseReport(
        omega=omega,
        lower=lower,
        upper=upper,
        posterior=posterior,
        holds=holds,
    )


def collapse_violation(report: CollapseReport) -> float:
    """Largest relative excursion of the posterior outside its bounds, 0 if inside."""
    below = (report.lower - report.posterior) / report.lower
    above = (report.posterior - report.upper) / report.upper
    return float(max(below.max(), above.max(), 0.0))


def sink_margin(logits, j_star: int) -> float:
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1 or logits.size < 2:
        raise DomainError(
            "A sink margin needs at least two logits",
            error_data={"shape": list(logits.shape)},
        )
    if not 0 <= j_star < logits.size:
        raise DomainError("j_star out of range", error_data={"j_star": j_star})
    return float(logits[j_star] - np.delete(logits, j_star).max())


def margin_mass_floor(margin: float, length: int) -> float:
    """Lower bound on the sink's probability implied by a positive margin."""
    return 1.0 / (1.0 + (length - 1) * math.exp(-margin))


def context_sensitivity(weights_row, j_star: int) -> float:
    """Psi = 1 - p_{j*}, the total mass on context keys."""
    row = as_prob_vector(weights_row)
    if not 0 <= j_star < row.size:
        raise DomainError("j_star out of range", error_data={"j_star": j_star})
    # summing the context directly keeps tiny Psi accurate
    return math.fsum(np.delete(row, j_star))


def sensitivity_bound(length: int, delta: float) -> float:
    """(L - 1) / (exp(delta) + L - 1), written to stay finite for large delta."""
    scaled = (length - 1) * math.exp(-delta)
    return scaled / (1.0 + scaled)


def peaked_prior(length: int, delta: float, j_star: int = 0) -> np.ndarray:
    log_prior = np.zeros(length)
    log_prior[j_star] = delta
    return softmax_attention(log_prior, 1.0)


def sensitivity_bound_check(length: int, delta: float) -> SensitivityCheck:
    """Zero content scores, prior margin exactly delta on every context key."""
    if length < 2:
        raise DomainError("Sensitivity needs L >= 2", error_data={"L": length})
    prior = peaked_prior(length, delta)
    posterior = kl_prior_attention(
        TransportProblem(scores=np.zeros(length), prior=prior, temperature=1.0),
    )
    bound = sensitivity_bound(length, delta)
    empirical = context_sensitivity(posterior, 0)
    return SensitivityCheck(
        bound=bound,
        empirical=empirical,
        holds=empirical <= bound * (1 + BOUND_SLACK),
    )


def _lag_distribution(lam: float, length: int) -> np.ndarray:
    log_weights = -lam * np.arange(length)
    return np.exp(log_weights - logsumexp(log_weights))


def mean_lag(lam: float, length: int) -> float:
    return float(_lag_distribution(lam, length) @ np.arange(length))


def mean_lag_derivative(lam: float, length: int) -> float:
    """m'(lam) = -Var(d) under the exponential lag distribution."""
    lags = np.arange(length)
    q = _lag_distribution(lam, length)
    centred = lags - q @ lags
    return -float(q @ centred**2)


def _bracket(objective, lo: float, hi: float) -> tuple[float, float]:
    for _ in range(60):
        if objective(lo) > 0 > objective(hi):
            return lo, hi
        lo, hi = 2 * lo, 2 * hi
    raise DomainError("Could not bracket the recency decay", error_data={"hi": hi})


def maxent_recency(length: int, mu: float) -> RecencyPrior:
    """Entropy-maximising lag distribution over {0, ..., L-1} with mean `mu`.

    The mean map is strictly decreasing in the decay, so bisection on a
    bracket finds the root and a few Newton steps polish it.
    """
    if not 0 < mu < length - 1:
        raise DomainError(
            "Mean lag must lie in (0, L - 1)",
            error_data={"L": length, "mu": mu},
        )

    def objective(lam: float) -> float:
        return mean_lag(lam, length) - mu

    lo, hi = _bracket(objective, -LAMBDA_BRACKET, LAMBDA_BRACKET)
    lam = bisect(objective, lo, hi, xtol=MEAN_TOL, maxiter=500)

    residual = objective(lam)
    for _ in range(NEWTON_STEPS):
        if abs(residual) <= MEAN_TOL:
            break
        slope = mean_lag_derivative(lam, length)
        if slope == 0:
            break
        candidate = lam - residual / slope
        candidate_residual = objective(candidate)
        if abs(candidate_residual) >= abs(residual):
            break
        lam, residual = candidate, candidate_residual

    distribution = _lag_distribution(lam, length)
    return RecencyPrior(
        lambda_=lam,
        distribution=distribution,
        mean_lag=float(distribution @ np.arange(length)),
    )


def constrained_probes(
    rng: np.random.Generator,
    length: int,
    mu: float,
    n: int,
) -> np.ndarray:
    """Random lag distributions with mean exactly `mu`.

    Each flat-Dirichlet draw is mixed with a point mass at lag 0 or L-1,
    whichever moves its mean onto `mu`.
    """
    lags = np.arange(length)
    probes = rng.dirichlet(np.ones(length), size=n)
    means = probes @ lags
    endpoint = np.zeros((n, length))
    high = means < mu
    endpoint[~high, 0] = 1.0
    endpoint[high, length - 1] = 1.0
    weight = np.where(high, (length - 1 - mu) / (length - 1 - means), mu / means)
    return weight[:, None] * probes + (1 - weight)[:, None] * endpoint


def maxent_entropy_gap(prior: RecencyPrior, probes: np.ndarray) -> float:
    """max over probes of H(probe) - H(maxent); never positive beyond rounding."""
    best = entropy(prior.distribution)
    return max(entropy(probe) for probe in probes) - best


def alibi_equivalence(scores_row, m: float, i: int) -> AlibiEquivalence:
    scores = np.asarray(scores_row, dtype=np.float64)
    if i < 0 or scores.size < i + 1:
        raise DomainError(
            "Scores must cover the admissible keys 0..i",
            error_data={"i": i, "length": scores.size},
        )
    admissible = scores[: i + 1]
    keys = np.arange(i + 1)
    p_lag = softmax_attention(admissible - m * (i - keys), 1.0)
    p_key = softmax_attention(admissible + m * keys, 1.0)
    return AlibiEquivalence(
        p_lag=p_lag,
        p_key=p_key,
        max_diff=float(np.max(np.abs(p_lag - p_key))),
    )


def _power_iteration(
    matrix: np.ndarray,
    start: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Top singular triple by alternating products with the matrix and its transpose."""
    right = start / np.linalg.norm(start)
    sigma = 0.0
    left = np.zeros(matrix.shape[0])
    for _ in range(POWER_MAX_ITER):
        image = matrix @ right
        norm = np.linalg.norm(image)
        if norm == 0:
            return 0.0, left, right
        left = image / norm
        back = matrix.T @ left
        previous, sigma = sigma, float(np.linalg.norm(back))
        right = back / sigma
        if abs(sigma - previous) <= POWER_TOL * sigma:
            break
    return sigma, left, right


def top_two_singular_values(matrix, seed: int = 0) -> tuple[float, float]:
    matrix = np.asarray(matrix, dtype=np.float64)
    start = np.random.default_rng(seed).normal(size=matrix.shape[1])
    sigma_1, left, right = _power_iteration(matrix, start)
    if sigma_1 == 0:
        return 0.0, 0.0
    deflated = matrix - sigma_1 * np.outer(left, right)
    sigma_2, _, _ = _power_iteration(deflated, start)
    return sigma_1, sigma_2


def key_only_rank(u, length: int) -> RankReport:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (length,):
        raise DomainError(
            "u must have one entry per key",
            error_data={"u": list(u.shape), "L": length},
        )
    # U_ij = u_j for every query row i
    return singular_ratio(np.outer(np.ones(length), u))


def singular_ratio(matrix) -> RankReport:
    sigma_1, sigma_2 = top_two_singular_values(matrix)
    if sigma_1 == 0:
        return RankReport(
            sigma_1=0.0,
            sigma_2=0.0,
            second_singular_ratio=0.0,
            rank_le_one=True,
            rank=0,
        )
    ratio = sigma_2 / sigma_1
    rank_le_one = ratio <= RANK_ONE_RATIO
    return RankReport(
        sigma_1=sigma_1,
        sigma_2=sigma_2,
        second_singular_ratio=ratio,
        rank_le_one=rank_le_one,
        rank=1 if rank_le_one else 2,
    )


def sink_mass_curve(length: int, delta: float, omegas) -> list[SinkMassPoint]:
    """Sink mass as content evidence for a competing key grows.

    Key 0 is a prior sink with margin `delta`; key 1 gets content score
    `omega`, every other score is 0, so omega is the content dynamic range.
    """
    if length < 2:
        raise DomainError("Sink mass needs L >= 2", error_data={"L": length})
    prior = peaked_prior(length, delta)
    points = []
    for omega in omegas:
        scores = np.zeros(length)
        scores[1] = omega
        report = collapse_bounds(scores, prior)
        points.append(
            SinkMassPoint(
                omega=float(omega),
                sink_mass=float(report.posterior[0]),
                lower=float(report.lower[0]),
                upper=float(report.upper[0]),
            ),
        )
    return points


def perturbation_bound(
    weights_row,
    j_star: int,
    values,
    eps: float,
    rng: np.random.Generator,
) -> PerturbationCheck:
    """Shift every context value vector by at most `eps` and compare the
    output change against eps * Psi."""
    row = as_prob_vector(weights_row)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != row.size:
        raise DomainError(
            "Need one value vector per key",
            error_data={"values": list(values.shape), "L": row.size},
        )
    directions = rng.normal(size=values.shape)
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = eps * rng.uniform(size=(row.size, 1))
    delta_values = directions * radii
    delta_values[j_star] = 0.0

    # the output is linear in the values, so its change is row @ delta_values
    output_shift = float(np.linalg.norm(row @ delta_values))
    sensitivity = context_sensitivity(row, j_star)
    bound = eps * sensitivity
    return PerturbationCheck(
        sensitivity=sensitivity,
        output_shift=output_shift,
        bound=bound,
        holds=output_shift <= bound * (1 + 1e-9) + 1e-15,
    )
