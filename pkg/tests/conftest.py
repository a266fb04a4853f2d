"""Shared fixtures.  The whole suite runs offline: the real network
transport is disarmed for every test, so any code path that would touch
the network fails loudly instead."""

from __future__ import annotations

import pytest

from oxtract import fetcher as fetcher_mod
from oxtract.fetcher import Fetcher, FetchPolicy, MappingTransport
from oxtract.fixtures import PortalSpec, generate_portal, seed_cache


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    def refuse(self, method, url, body, headers, timeout):
        raise AssertionError(f"network request attempted in tests: {method} {url}")

    monkeypatch.setattr(fetcher_mod.UrllibTransport, "request", refuse)


@pytest.fixture(scope="session")
def portal(tmp_path_factory):
    """The flagship 3x4x2 portal with a pre-seeded replay cache."""
    root = tmp_path_factory.mktemp("portal-fixture")
    portal_dir = root / "portal"
    cache_dir = root / "cache"
    manifest = generate_portal(PortalSpec(), portal_dir)
    seed_cache(portal_dir, cache_dir)
    return {"dir": portal_dir, "cache": cache_dir, "manifest": manifest}


@pytest.fixture
def replay_fetcher(portal):
    return Fetcher(FetchPolicy(delay_s=0, cache_mode="replay-only",
                               cache_dir=str(portal["cache"])))


def make_fetcher(pages: dict[tuple[str, str], bytes], **policy) -> Fetcher:
    policy.setdefault("delay_s", 0)
    policy.setdefault("respect_robots", False)
    return Fetcher(FetchPolicy(**policy), MappingTransport(pages))
