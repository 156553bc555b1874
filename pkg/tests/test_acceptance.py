"""The nine-point verification campaign, one test per criterion.

Each test delegates to the shared criterion function (the same code the
`verify-all` command runs), asserts the pass flag and carries the measured
numbers in the assertion message, so a failure prints the evidence.
"""

from __future__ import annotations

from nsp_waves import acceptance


def _check(result):
    print(result.line())
    assert result.passed, result.line()


def test_criterion_1_profile_correctness(ctx):
    _check(acceptance.criterion_profile(ctx))


def test_criterion_2_periodic_decay(ctx):
    _check(acceptance.criterion_periodic(ctx))


def test_criterion_3_shift_consistency(ctx):
    _check(acceptance.criterion_shifts(ctx))


def test_criterion_4_zero_mass_enforcement(ctx):
    _check(acceptance.criterion_zero_mass(ctx))


def test_criterion_5_ansatz_residual_decay(ctx):
    _check(acceptance.criterion_residuals(ctx))


def test_criterion_6_shock_cauchy_run(ctx):
    _check(acceptance.criterion_shock_run(ctx))


def test_criterion_7_rarefaction_cauchy_run(ctx):
    # The contraction clause is not reachable at these scales: the measured
    # fan convergence over [10, 100] is set by the fixed smoothing scale of
    # the initial data, which only becomes negligible against the fan width
    # for horizons an order of magnitude longer.  The run and the envelope
    # clause are still exercised; the assertion states the requirement as
    # given and fails with the measured numbers.
    _check(acceptance.criterion_rarefaction_run(ctx))


def test_criterion_8_remainder_calculus(ctx):
    _check(acceptance.criterion_remainders(ctx))


def test_criterion_9_oracle_suite(ctx):
    _check(acceptance.criterion_oracles(ctx))
