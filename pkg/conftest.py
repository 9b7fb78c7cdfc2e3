#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

SCENARIOS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")


def pytest_addoption(parser):
    parser.addoption("--run-acceptance", action="store_true", default=False,
                     help="run full scale scenario acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full scale scenario run, needs --run-acceptance")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-acceptance"):
        return
    skip_acceptance = pytest.mark.skip(reason="needs --run-acceptance")
    for item in items:
        if "acceptance" in item.keywords:
            item.add_marker(skip_acceptance)


@pytest.fixture
def scenarios_dir():
    return SCENARIOS_DIR
