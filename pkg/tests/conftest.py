"""Shared test configuration.

Hypothesis runs derandomized so CI failures reproduce locally; 50 examples
per property keeps the whole suite inside the acceptance time budgets.
"""

from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    max_examples=50,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")
