"""Shared fixtures: gateways wired to scripted mock backends."""

import pytest

from sightguide.backends import (
    FixtureSet,
    MockGenerator,
    MockSynthesizer,
    MockTagger,
    MockTranscriber,
)
from sightguide.gateway import Gateway


@pytest.fixture
def make_gateway():
    def build(fixtures: FixtureSet, **kwargs) -> Gateway:
        return Gateway(
            tagger=MockTagger(fixtures),
            generator=MockGenerator(fixtures),
            transcriber=MockTranscriber(fixtures),
            synthesizer=MockSynthesizer(),
            **kwargs,
        )

    return build
