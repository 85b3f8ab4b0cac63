import hypothesis
import pytest

from regnas import SearchSpaceDef, StageDef

hypothesis.settings.register_profile("fast", max_examples=25)
hypothesis.settings.register_profile("ci", max_examples=200)
hypothesis.settings.load_profile("fast")


@pytest.fixture(scope="session")
def point_space():
    """Single-architecture space."""
    return SearchSpaceDef(
        stages=(StageDef((1,), (3,), (8,), stride=1),),
        input_resolution=16,
        stem_channels=3,
        num_classes=10,
    )


@pytest.fixture(scope="session")
def oracle_space():
    """1,764 architectures; small enough to enumerate, rich in all three axes."""
    return SearchSpaceDef(
        stages=(
            StageDef((1, 2), (3, 5), (8, 16, 24), stride=2),
            StageDef((1, 2), (3, 5), (8, 16, 24), stride=2),
        ),
        input_resolution=32,
        stem_channels=8,
        num_classes=10,
    )


@pytest.fixture(scope="session")
def stat_space():
    """8,000 architectures across three stages; used for trend experiments."""
    return SearchSpaceDef(
        stages=(
            StageDef((1, 2), (3, 5), (8, 16), stride=2),
            StageDef((1, 2), (3, 5), (8, 16), stride=2),
            StageDef((1, 2), (3, 5), (8, 16), stride=2),
        ),
        input_resolution=32,
        stem_channels=8,
        num_classes=10,
    )


@pytest.fixture(scope="session")
def ragged_space():
    """Odd widths and kernels (not block-aligned) to stress channel wiring."""
    return SearchSpaceDef(
        stages=(
            StageDef((1, 2), (1, 3), (2, 3, 5), stride=1),
            StageDef((1, 2, 3), (3, 5), (2, 4), stride=2),
        ),
        input_resolution=8,
        stem_channels=3,
        num_classes=10,
    )
