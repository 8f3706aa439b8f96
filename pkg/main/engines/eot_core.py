"""
Attention as one-sided entropic optimal transport.

A query distributes one unit of mass over L keys. With transport cost -s and
a KL regulariser towards a prior pi at temperature tau, the optimal plan is
softmax(s / tau + log pi); with a uniform prior this is ordinary softmax
attention. The mirror-descent minimiser below is an independent oracle for
that closed form.
"""

import numpy as np
from scipy.special import logsumexp, rel_entr, xlogy

from main.commons.exceptions import DomainError
from main.schemas.eot import TransportProblem, check_prob_vector


def _stable_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    weights = np.exp(shifted)
    return weights / weights.sum()


def softmax_attention(scores, temperature: float) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise DomainError("Scores must be a non-empty 1-D array")
    if not np.all(np.isfinite(scores)):
        raise DomainError("Scores must be finite")
    if not np.isfinite(temperature) or temperature <= 0:
        raise DomainError(
            "Temperature must be positive",
            error_data={"temperature": temperature},
        )
    return _stable_softmax(scores / temperature)


def kl_prior_attention(problem: TransportProblem) -> np.ndarray:
    """softmax(s / tau + log pi), the minimiser of -<p, s> + tau KL(p || pi)."""
    prior = problem.prior
    if np.all(prior == prior[0]):
        # log pi is a constant shift; reuse the plain path bit for bit
        return softmax_attention(problem.scores, problem.temperature)
    return _stable_softmax(problem.scores / problem.temperature + np.log(prior))


def entropy(p) -> float:
    p = np.asarray(p, dtype=np.float64)
    return float(-xlogy(p, p).sum())


def kl_divergence(p, q) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DomainError(
            "Distributions have different lengths",
            error_data={"p": p.size, "q": q.size},
        )
    return float(rel_entr(p, q).sum())


def eot_objective(p, problem: TransportProblem) -> float:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != problem.scores.shape:
        raise DomainError(
            "Plan and problem lengths differ",
            error_data={"plan": p.size, "problem": problem.length},
        )
    transport_cost = -float(p @ problem.scores)
    return transport_cost + problem.temperature * kl_divergence(p, problem.prior)


def shannon_objective(p, scores, temperature: float) -> float:
    """-<p, s> - tau H(p); equals the uniform-prior objective minus tau log L."""
    p = np.asarray(p, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    if p.shape != scores.shape:
        raise DomainError(
            "Plan and scores lengths differ",
            error_data={"plan": p.size, "scores": scores.size},
        )
    return -float(p @ scores) - temperature * entropy(p)


def brute_force_minimize(
    problem: TransportProblem,
    iters: int = 200,
    step: float | None = None,
) -> np.ndarray:
    """Entropic mirror descent on the simplex, started from the uniform plan.

    Each update multiplies p by exp(-step * grad) and renormalises, so every
    iterate stays strictly inside the simplex. The iteration contracts at
    rate |1 - step * tau|, hence `step` must lie in (0, 2 / tau); it defaults
    to 0.5 / tau.
    """
    if iters < 1:
        raise DomainError("iters must be at least 1", error_data={"iters": iters})
    if step is None:
        step = 0.5 / problem.temperature
    if not 0 < step * problem.temperature < 2:
        raise DomainError(
            "step * temperature must lie in (0, 2)",
            error_data={"step": step, "temperature": problem.temperature},
        )

    tau = problem.temperature
    log_prior = np.log(problem.prior)
    log_p = np.full(problem.length, -np.log(problem.length))
    for _ in range(iters):
        # grad of the objective is -s + tau (log p - log pi + 1); the +1 is
        # absorbed by normalisation
        gradient = -problem.scores + tau * (log_p - log_prior)
        log_p = log_p - step * gradient
        log_p -= logsumexp(log_p)

    return np.exp(log_p)


def sample_simplex(rng: np.random.Generator, length: int, n: int = 1) -> np.ndarray:
    """`n` points drawn uniformly from the simplex over `length` keys."""
    return rng.dirichlet(np.ones(length), size=n)


def as_prob_vector(values) -> np.ndarray:
    return check_prob_vector(np.asarray(values, dtype=np.float64))
