"""Shared fixtures: a frozen synthetic corpus and evaluation contexts."""

from decimal import Decimal

import numpy as np
import pytest

from migadvisor.footprint import LinkParams
from migadvisor.pipeline import build_context, learn_model
from migadvisor.plans import Preferences
from migadvisor.quality import PricingCatalog
from migadvisor.scenario import expected_usage, generate_corpus
from migadvisor.topologies import mini_topology, mini_workload

# pass/fail lines collected by the acceptance tests, echoed after the run
# so they survive output capture
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


# measured local link vs a typical on-prem to cloud link
LINKS = LinkParams.from_network(0.168, 941.0, 23.015, 921.0)

# node sizes and prices chosen so that compute, storage, and egress all
# contribute meaningfully on the mini scenario
SEARCH_PRICING = PricingCatalog(
    omega_cpu=0.25,
    omega_mem=0.5,
    theta_compute_hourly=Decimal("0.096"),
    theta_storage_gb_hourly=Decimal("0.01"),
    theta_traffic_gb=Decimal("0.09"),
)

# forces part of the app into the cloud, making the search non-trivial
SEARCH_PREFS = Preferences(onprem_limits={"cpu": 0.6})


@pytest.fixture(scope="session")
def mini_parts():
    return mini_topology(), mini_workload(120)


@pytest.fixture(scope="session")
def mini_corpus(mini_parts):
    topology, workload = mini_parts
    return generate_corpus(topology, workload, LINKS, rng=np.random.default_rng(7), sigma=0.0)


@pytest.fixture(scope="session")
def mini_usage(mini_parts):
    topology, workload = mini_parts
    return expected_usage(topology, workload)


@pytest.fixture(scope="session")
def mini_footprint(mini_corpus):
    return learn_model(mini_corpus.traces, mini_corpus.traffic_records)


def make_context(corpus, footprint, usage, prefs, sample_budget=30):
    return build_context(
        corpus.catalog,
        corpus.traces,
        footprint,
        LINKS,
        usage,
        SEARCH_PRICING,
        prefs,
        sample_budget=sample_budget,
    )


@pytest.fixture(scope="session")
def mini_context(mini_corpus, mini_footprint, mini_usage):
    return make_context(mini_corpus, mini_footprint, mini_usage, SEARCH_PREFS)


# jittered variant: drift detection needs baseline latency variance
JITTER_SIGMA = 0.08


@pytest.fixture(scope="session")
def jittered_corpus():
    topology = mini_topology()
    return generate_corpus(
        topology,
        mini_workload(60),
        LINKS,
        rng=np.random.default_rng(11),
        sigma=JITTER_SIGMA,
    )


@pytest.fixture(scope="session")
def jittered_context(jittered_corpus):
    topology = mini_topology()
    footprint = learn_model(jittered_corpus.traces, jittered_corpus.traffic_records)
    usage = expected_usage(topology, mini_workload(60))
    return make_context(jittered_corpus, footprint, usage, SEARCH_PREFS)
