"""
Property suites behind `goat verify`. Each suite draws seeded random cases,
runs a closed form against its oracle or bound, and tallies one
`CheckResult` per property: case count, cases over tolerance, and the
largest measured deviation.
"""

import math
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from main._config import config
from main.engines.attention import (
    AllocationMeter,
    composite_vectors,
    explicit_bias_attention,
    goat_attention_forward,
    goat_head_forward,
    goat_head_reference,
    random_head_params,
    sdpa,
)
from main.engines.eot_core import (
    brute_force_minimize,
    eot_objective,
    kl_prior_attention,
    sample_simplex,
    shannon_objective,
)
from main.engines.prior import (
    fourier_key,
    geometric_frequencies,
    log_prior_matrix,
    relative_log_prior_matrix,
    spectral_rotate_query,
)
from main.engines.theory_checks import (
    BOUND_SLACK,
    alibi_equivalence,
    collapse_bounds,
    collapse_violation,
    constrained_probes,
    context_sensitivity,
    key_only_rank,
    maxent_entropy_gap,
    maxent_recency,
    perturbation_bound,
    sensitivity_bound,
    sensitivity_bound_check,
    singular_ratio,
    sink_mass_curve,
)
from main.engines.toy_lm.gradcheck import GRADCHECK_TOLERANCE, seeded_gradient_check
from main.enums import Suite
from main.libs.log import get_logger
from main.schemas.attention import AttentionBatch, GoatBlockParams
from main.schemas.eot import TransportProblem
from main.schemas.prior import GoatHeadConfig, SpectralPriorParams
from main.schemas.theory import CheckResult


logger = get_logger(__name__)

SuiteRunner = Callable[[np.random.Generator, int], list[CheckResult]]


def _max_gap(first, second) -> float:
    return float(np.max(np.abs(np.asarray(first) - np.asarray(second)), initial=0.0))


def tally(name: str, deviations: Iterable[float], tolerance: float) -> CheckResult:
    values = np.fromiter(deviations, dtype=np.float64)
    return CheckResult(
        check_name=name,
        cases=int(values.size),
        failures=int(np.count_nonzero(~(values <= tolerance))),
        max_violation=float(values.max()) if values.size else 0.0,
    )


def _random_problem(rng: np.random.Generator, max_length: int = 64) -> TransportProblem:
    length = int(rng.integers(1, max_length + 1))
    return TransportProblem(
        scores=rng.normal(scale=2.0, size=length),
        prior=sample_simplex(rng, length)[0] * 0.98 + 0.02 / length,
        temperature=float(rng.uniform(0.25, 4.0)),
    )


def eot_suite(rng: np.random.Generator, _: int) -> list[CheckResult]:
    oracle_gap, probe_gap, reduction_gap = [], [], []
    for _ in range(100):
        problem = _random_problem(rng)
        closed = kl_prior_attention(problem)
        oracle = brute_force_minimize(problem)
        oracle_gap.append(_max_gap(closed, oracle))

        best = eot_objective(closed, problem)
        probes = sample_simplex(rng, problem.length, 1000)
        lowest = min(eot_objective(probe, problem) for probe in probes)
        probe_gap.append(max(best - lowest, 0.0))

        uniform = TransportProblem.uniform(problem.scores, problem.temperature)
        plan = kl_prior_attention(uniform)
        reduction_gap.append(
            abs(
                shannon_objective(plan, problem.scores, problem.temperature)
                - eot_objective(plan, uniform)
                + problem.temperature * math.log(problem.length),
            ),
        )
    return [
        tally("eot.oracle_match", oracle_gap, 1e-6),
        tally("eot.probe_optimality", probe_gap, 1e-12),
        tally("eot.uniform_prior_reduction", reduction_gap, 1e-10),
    ]


def convexity_suite(rng: np.random.Generator, _: int) -> list[CheckResult]:
    excess = []
    for _ in range(200):
        problem = _random_problem(rng)
        p, q = sample_simplex(rng, problem.length, 2)
        ends = eot_objective(p, problem), eot_objective(q, problem)
        # 11 points along the segment, endpoints included
        for t in np.linspace(0.0, 1.0, 11):
            mixed = eot_objective(t * p + (1 - t) * q, problem)
            chord = t * ends[0] + (1 - t) * ends[1]
            excess.append(max(mixed - chord, 0.0))
    return [tally("convexity.objective_convex", excess, 1e-12)]


def factorization_suite(rng: np.random.Generator, _: int) -> list[CheckResult]:
    positions = np.arange(256)
    deviations: list[float] = []
    for rank in (1, 4, 8):
        spectral = SpectralPriorParams(
            frequencies=geometric_frequencies(rank),
            alpha=rng.normal(size=rank),
            beta=rng.normal(size=rank),
        )
        products = spectral_rotate_query(positions, spectral) @ fourier_key(
            positions,
            spectral.frequencies,
        ).T
        gap = np.abs(products - relative_log_prior_matrix(positions.size, spectral))
        deviations.extend(gap.ravel())
    return [tally("factorization.spectral_identity", deviations, 1e-10)]


def _random_head(
    rng: np.random.Generator,
    d_model: int = 8,
    max_length: int = 128,
):
    rank = int(rng.integers(0, 5))
    cfg = GoatHeadConfig(d_h=int(rng.integers(1, 9)) + 2 * rank + 2, R=rank)
    params = random_head_params(rng, d_model, cfg, l_ref=64, sink_hidden=4)
    length = int(rng.integers(1, max_length + 1))
    hidden = rng.normal(size=(length, d_model))
    return cfg, params, hidden


def scaling_suite(rng: np.random.Generator, _: int) -> list[CheckResult]:
    logit_gap, weight_gap = [], []
    for _ in range(100):
        cfg, params, hidden = _random_head(rng)
        queries, keys, values = composite_vectors(hidden, params, cfg)
        q_c, k_c = hidden @ params.w_q, hidden @ params.w_k
        bias = log_prior_matrix(hidden.shape[0], params.spectral, params.sink)

        composite = queries @ keys.T / math.sqrt(cfg.d_h)
        explicit = q_c @ k_c.T / math.sqrt(cfg.d_c) + bias
        logit_gap.append(_max_gap(composite, explicit))

        batch = AttentionBatch(queries=queries, keys=keys, values=values)
        _, composite_weights = sdpa(batch)
        _, explicit_weights = explicit_bias_attention(q_c, k_c, values, bias)
        weight_gap.append(_max_gap(composite_weights, explicit_weights))
    return [
        tally("scaling.composite_logits", logit_gap, 1e-10),
        tally("scaling.composite_weights", weight_gap, 1e-10),
    ]


def attention_suite(rng: np.random.Generator, _: int) -> list[CheckResult]:
    head_gap, uniform_gap, block_gap, meter_gap = [], [], [], []
    for _ in range(100):
        cfg, params, hidden = _random_head(rng)
        length = hidden.shape[0]
        head_gap.append(
            _max_gap(
                goat_head_forward(hidden, params, cfg),
                goat_head_reference(hidden, params, cfg),
            ),
        )

        zero = random_head_params(
            rng,
            hidden.shape[1],
            cfg,
            l_ref=64,
            sink_hidden=4,
            zero_prior=True,
        )
        content, _ = sdpa(
            AttentionBatch(
                queries=hidden @ zero.w_q,
                keys=hidden @ zero.w_k,
                values=hidden @ zero.w_v,
            ),
        )
        uniform_gap.append(_max_gap(goat_head_forward(hidden, zero, cfg), content))

        block = GoatBlockParams(
            heads=[params, zero],
            w_o=rng.normal(size=(2 * cfg.d_h, hidden.shape[1])),
        )
        stacked = np.concatenate(
            [goat_head_forward(hidden, head, cfg) for head in block.heads],
            axis=-1,
        )
        block_gap.append(
            _max_gap(goat_attention_forward(hidden, block, cfg), stacked @ block.w_o),
        )

        meter = AllocationMeter()
        goat_head_forward(hidden, params, cfg, meter=meter)
        meter_gap.append(abs(meter.total - 2 * length * cfg.d_p * 8))
    return [
        tally("attention.composite_vs_dense_head", head_gap, 1e-10),
        tally("attention.zero_prior_is_sdpa", uniform_gap, 1e-12),
        tally("attention.block_is_projected_heads", block_gap, 1e-10),
        tally("attention.composite_bytes", meter_gap, 0.0),
    ]


def collapse_suite(rng: np.random.Generator, _: int) -> list[CheckResult]:
    violations, flat_gap = [], []
    for _ in range(10_000):
        length = int(rng.integers(2, 257))
        prior = sample_simplex(rng, length)[0] * 0.98 + 0.02 / length
        scores = rng.normal(scale=float(rng.uniform(0.0, 5.0)), size=length)
        violations.append(collapse_violation(collapse_bounds(scores, prior)))
    for _ in range(100):
        length = int(rng.integers(2, 257))
        prior = sample_simplex(rng, length)[0] * 0.98 + 0.02 / length
        report = collapse_bounds(np.full(length, float(rng.normal())), prior)
        flat_gap.append(_max_gap(report.posterior, prior))

    curve_break = []
    for delta in (0.0, 1.0, 4.0):
        points = sink_mass_curve(16, delta, np.linspace(0.0, 12.0, 25))
        masses = np.array([point.sink_mass for point in points])
        outside = [
            max(point.lower - point.sink_mass, point.sink_mass - point.upper, 0.0)
            for point in points
        ]
        curve_break.append(max(float(np.max(np.diff(masses), initial=0.0)), *outside))
    return [
        tally("collapse.bounds", violations, BOUND_SLACK),
        tally("collapse.zero_range_is_prior", flat_gap, 1e-15),
        tally("collapse.sink_mass_curve", curve_break, 1e-15),
    ]


def sensitivity_suite(rng: np.random.Generator, _: int) -> list[CheckResult]:
    uniform_gap, bound_excess, equality_gap = [], [], []
    for length in range(2, 1025):
        posterior = kl_prior_attention(
            TransportProblem.uniform(np.zeros(length), 1.0),
        )
        exact = (length - 1) / length
        uniform_gap.append(abs(context_sensitivity(posterior, 0) - exact) / exact)
        for delta in (0.0, 1.0, math.log(length), 30.0):
            check = sensitivity_bound_check(length, delta)
            bound_excess.append(0.0 if check.holds else check.empirical - check.bound)
            equality_gap.append(
                abs(check.empirical - sensitivity_bound(length, delta)) / check.bound,
            )

    perturbation_excess = []
    for _ in range(200):
        length = int(rng.integers(2, 33))
        row = sample_simplex(rng, length)[0]
        values = rng.normal(size=(length, 4))
        check = perturbation_bound(row, int(rng.integers(length)), values, 0.1, rng)
        excess = 0.0 if check.holds else check.output_shift - check.bound
        perturbation_excess.append(excess)
    return [
        tally("sensitivity.uniform_prior", uniform_gap, 1e-12),
        tally("sensitivity.peaked_prior_bound", bound_excess, 0.0),
        tally("sensitivity.equality_case", equality_gap, 1e-12),
        tally("sensitivity.value_perturbation", perturbation_excess, 0.0),
    ]


def maxent_suite(rng: np.random.Generator, _: int) -> list[CheckResult]:
    mean_gap, entropy_excess = [], []
    for _ in range(20):
        length = int(rng.integers(2, 65))
        mu = float(rng.uniform(0.05, 0.95)) * (length - 1)
        prior = maxent_recency(length, mu)
        mean_gap.append(abs(prior.mean_lag - mu))
        probes = constrained_probes(rng, length, mu, 1000)
        entropy_excess.append(max(maxent_entropy_gap(prior, probes), 0.0))

    two_keys = maxent_recency(2, 0.25)
    return [
        tally("maxent.mean_constraint", mean_gap, 1e-10),
        tally("maxent.two_key_decay", [abs(two_keys.lambda_ - math.log(3))], 1e-10),
        tally("maxent.entropy_dominates_probes", entropy_excess, 1e-12),
    ]


def alibi_suite(rng: np.random.Generator, _: int) -> list[CheckResult]:
    gaps = []
    for _ in range(1000):
        i = int(rng.integers(0, 64))
        scores = rng.normal(size=i + 1)
        gaps.append(alibi_equivalence(scores, float(rng.uniform(0.0, 0.5)), i).max_diff)
    return [tally("alibi.lag_vs_key_linear", gaps, 1e-14)]


def rank_suite(rng: np.random.Generator, _: int) -> list[CheckResult]:
    ratios, missed = [], []
    for _ in range(100):
        length = int(rng.integers(2, 65))
        u = rng.normal(size=length)
        ratios.append(key_only_rank(u, length).second_singular_ratio)

        # negative control: a rank-2 perturbation must be detected
        perturbed = np.outer(np.ones(length), u) + np.outer(
            rng.normal(size=length),
            rng.normal(size=length),
        )
        missed.append(float(singular_ratio(perturbed).rank_le_one))
    return [
        tally("rank.key_only_rank_one", ratios, 1e-9),
        tally("rank.negative_control_flagged", missed, 0.0),
    ]


def gradients_suite(_: np.random.Generator, seeds: int) -> list[CheckResult]:
    errors = [seeded_gradient_check(seed).max_relative_error for seed in range(seeds)]
    return [tally("gradients.finite_differences", errors, GRADCHECK_TOLERANCE)]


SUITES: dict[Suite, SuiteRunner] = {
    Suite.EOT: eot_suite,
    Suite.CONVEXITY: convexity_suite,
    Suite.FACTORIZATION: factorization_suite,
    Suite.SCALING: scaling_suite,
    Suite.ATTENTION: attention_suite,
    Suite.COLLAPSE: collapse_suite,
    Suite.SENSITIVITY: sensitivity_suite,
    Suite.MAXENT: maxent_suite,
    Suite.ALIBI: alibi_suite,
    Suite.RANK: rank_suite,
    Suite.GRADIENTS: gradients_suite,
}


def _run_suite(suite: Suite, seed: int, gradcheck_seeds: int) -> list[CheckResult]:
    # seeded by the suite's position so filtering suites leaves results unchanged
    rng = np.random.default_rng([seed, list(Suite).index(suite)])
    results = SUITES[suite](rng, gradcheck_seeds)
    logger.info(
        "Suite finished",
        data={
            "suite": suite.value,
            "cases": sum(r.cases for r in results),
            "failures": sum(r.failures for r in results),
        },
    )
    return results


def run_suites(
    suites: list[Suite],
    seed: int = 0,
    gradcheck_seeds: int = 5,
) -> list[CheckResult]:
    """Suites are sharded over `GOAT_THREADS` workers; results keep the order
    of `suites`."""
    with ThreadPoolExecutor(max_workers=config.GOAT_THREADS) as pool:
        shards = pool.map(lambda s: _run_suite(s, seed, gradcheck_seeds), suites)
        return [result for shard in shards for result in shard]
