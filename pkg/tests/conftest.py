import pytest
from hypothesis import HealthCheck, settings

from tuniv.builder import build_universal
from tuniv.commands.demo import demo_config
from tuniv.files import BuildConfig

settings.register_profile(
    "tuniv",
    max_examples=50,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("tuniv")


@pytest.fixture(scope="session")
def demo() -> BuildConfig:
    return BuildConfig.model_validate(demo_config())


@pytest.fixture(scope="session")
def demo_family(demo):
    return demo.family.resolve()


@pytest.fixture(scope="session")
def demo_series(demo, demo_family):
    """The three-task demo series, built once."""
    return build_universal(demo.tasks, demo_family, demo.settings)
