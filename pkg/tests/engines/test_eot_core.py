import math

import numpy as np
import pytest

from main.commons.exceptions import DomainError
from main.engines.eot_core import (
    brute_force_minimize,
    entropy,
    eot_objective,
    kl_divergence,
    kl_prior_attention,
    sample_simplex,
    shannon_objective,
    softmax_attention,
)
from main.schemas.eot import TransportProblem


def test_softmax_of_equal_scores_is_uniform():
    np.testing.assert_allclose(softmax_attention([1.0, 1.0, 1.0, 1.0], 1.0), 0.25)


def test_softmax_single_key():
    assert softmax_attention([42.0], 0.3).tolist() == [1.0]


def test_softmax_does_not_overflow():
    weights = softmax_attention([1000.0, 0.0], 1.0)
    assert np.all(np.isfinite(weights))
    assert weights[0] == pytest.approx(1.0)


@pytest.mark.parametrize("temperature", [0.0, -1.0, math.inf, math.nan])
def test_softmax_rejects_bad_temperature(temperature):
    with pytest.raises(DomainError):
        softmax_attention([0.0, 1.0], temperature)


@pytest.mark.parametrize("scores", [[], [0.0, math.nan], [[0.0, 1.0]]])
def test_softmax_rejects_bad_scores(scores):
    with pytest.raises(DomainError):
        softmax_attention(scores, 1.0)


def test_kl_prior_with_zero_scores_is_the_prior():
    problem = TransportProblem(scores=[0.0, 0.0], prior=[0.9, 0.1], temperature=1.0)
    np.testing.assert_allclose(kl_prior_attention(problem), [0.9, 0.1], atol=1e-15)


def test_kl_prior_with_uniform_prior_matches_softmax_bitwise():
    scores = np.array([0.3, -1.2, 2.5, 0.0])
    problem = TransportProblem.uniform(scores, 0.7)
    assert np.array_equal(kl_prior_attention(problem), softmax_attention(scores, 0.7))


def test_kl_prior_hard_limit_at_low_temperature():
    problem = TransportProblem(
        scores=[1.0, 2.0, 0.5],
        prior=[0.2, 0.3, 0.5],
        temperature=1e-6,
    )
    np.testing.assert_allclose(kl_prior_attention(problem), [0.0, 1.0, 0.0], atol=1e-12)


def test_kl_prior_high_temperature_returns_prior():
    prior = np.array([0.2, 0.3, 0.5])
    problem = TransportProblem(scores=[1.0, 2.0, 0.5], prior=prior, temperature=1e9)
    np.testing.assert_allclose(kl_prior_attention(problem), prior, atol=1e-8)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"scores": [0.0, 1.0], "prior": [1.0, 0.0], "temperature": 1.0},
        {"scores": [0.0, 1.0], "prior": [0.5, 0.6], "temperature": 1.0},
        {"scores": [0.0, 1.0], "prior": [0.5, 0.5], "temperature": 0.0},
        {"scores": [0.0, 1.0, 2.0], "prior": [0.5, 0.5], "temperature": 1.0},
        {"scores": [0.0, math.inf], "prior": [0.5, 0.5], "temperature": 1.0},
    ],
)
def test_invalid_problems_are_domain_errors(kwargs):
    with pytest.raises(DomainError):
        TransportProblem(**kwargs)


def test_closed_form_matches_mirror_descent(rng):
    for _ in range(20):
        length = int(rng.integers(1, 40))
        problem = TransportProblem(
            scores=rng.normal(scale=2.0, size=length),
            prior=sample_simplex(rng, length)[0] * 0.9 + 0.1 / length,
            temperature=float(rng.uniform(0.25, 4.0)),
        )
        oracle = brute_force_minimize(problem)
        np.testing.assert_allclose(kl_prior_attention(problem), oracle, atol=1e-6)


def test_closed_form_beats_simplex_probes(rng):
    problem = TransportProblem(
        scores=rng.normal(size=12),
        prior=sample_simplex(rng, 12)[0] * 0.9 + 0.1 / 12,
        temperature=0.8,
    )
    best = eot_objective(kl_prior_attention(problem), problem)
    probes = sample_simplex(rng, 12, 500)
    assert all(best <= eot_objective(probe, problem) + 1e-12 for probe in probes)


@pytest.mark.parametrize("temperature", [4.0, 8.0, 20.0])
def test_mirror_descent_default_step_follows_temperature(rng, temperature):
    problem = TransportProblem(
        scores=rng.normal(scale=3.0, size=10),
        prior=sample_simplex(rng, 10)[0] * 0.9 + 0.01,
        temperature=temperature,
    )
    np.testing.assert_allclose(
        brute_force_minimize(problem),
        kl_prior_attention(problem),
        atol=1e-10,
    )


def test_mirror_descent_rejects_unstable_step():
    problem = TransportProblem.uniform([0.0, 1.0], 2.0)
    with pytest.raises(DomainError):
        brute_force_minimize(problem, step=1.0)
    with pytest.raises(DomainError):
        brute_force_minimize(problem, iters=0, step=0.1)


def test_entropy_and_kl_conventions():
    assert entropy([1.0, 0.0]) == 0.0
    assert entropy([0.25] * 4) == pytest.approx(math.log(4))
    assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))
    with pytest.raises(DomainError):
        kl_divergence([1.0], [0.5, 0.5])


def test_shannon_objective_is_uniform_prior_objective_shifted(rng):
    scores = rng.normal(size=7)
    problem = TransportProblem.uniform(scores, 1.5)
    plan = sample_simplex(rng, 7)[0]
    assert shannon_objective(plan, scores, 1.5) == pytest.approx(
        eot_objective(plan, problem) - 1.5 * math.log(7),
        abs=1e-12,
    )


def test_sample_simplex_rows_are_distributions(rng):
    probes = sample_simplex(rng, 5, 100)
    assert probes.shape == (100, 5)
    np.testing.assert_allclose(probes.sum(axis=1), 1.0)
    assert np.all(probes >= 0)


def test_softmax_is_shift_invariant(rng):
    scores = rng.normal(size=9)
    np.testing.assert_allclose(
        softmax_attention(scores + 123.25, 0.6),
        softmax_attention(scores, 0.6),
        rtol=0,
        atol=1e-15,
    )
