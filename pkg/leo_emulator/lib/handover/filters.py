#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.handover.filters.py

    Written by:               LEO Emulator contributors
    Date:                     12 Mar 2026, (9:14 AM)

    Copyright:
        Copyright (C) 2026 LEO Emulator contributors

        This program is free software: you can redistribute it and/or modify it under the terms of the GNU General
        Public License as published by the Free Software Foundation, version 3.

        This program is distributed in the hope that it will be useful, but WITHOUT ANY WARRANTY; without even the
        implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the GNU General Public License
        for more details.

        You should have received a copy of the GNU General Public License along with this program.
        If not, see <https://www.gnu.org/licenses/>.

"""
"""
Notes:
    - End-to-end policy filters. Each filter reduces a list of candidate GSS-USS pairs and
      never adds to it. Candidates are compared with a relative tolerance so that equal
      metrics computed along different paths tie.
"""
import logging
import math

from leo_emulator.lib.orbit import satellite_sort_key

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")


def _close(a, b):
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)


def _keep_best(pairs, metric, maximise=False):
    if not pairs:
        return []
    values = [metric(pair) for pair in pairs]
    best = max(values) if maximise else min(values)
    return [pair for pair, value in zip(pairs, values) if _close(value, best)]


class MinLifetimeFilter:

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "min-lifetime": {
                "id":    1,
                "label": "Drop pairs whose shorter remaining visibility is below T_lt",
            },
        }

    def apply(self, pairs, cfg):
        return [pair for pair in pairs if pair.min_visibility_s >= cfg.t_lt_s]


class MinOrbitHopsFilter:

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "min-orbit-hops": {
                "id":    2,
                "label": "Keep pairs with the minimum ISL hop count",
            },
        }

    def apply(self, pairs, cfg):
        # Disconnected pairs are never eligible
        reachable = [pair for pair in pairs if math.isfinite(pair.orbit_hops)]
        return _keep_best(reachable, lambda pair: pair.orbit_hops)


class MaxMinVisibilityFilter:

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "max-min-visibility": {
                "id":    3,
                "label": "Keep pairs maximising the shorter remaining visibility",
            },
        }

    def apply(self, pairs, cfg):
        return _keep_best(pairs, lambda pair: pair.min_visibility_s, maximise=True)


class MinAccessDelayFilter:

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "min-access-delay": {
                "id":    4,
                "label": "Keep pairs minimising the sum of both access delays",
            },
        }

    def apply(self, pairs, cfg):
        return _keep_best(pairs, lambda pair: pair.access_delay_sum_ms)


class MaxMinAccessRateFilter:

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "max-min-access-rate": {
                "id":    5,
                "label": "Keep pairs maximising the lower access rate",
            },
        }

    def apply(self, pairs, cfg):
        return _keep_best(pairs, lambda pair: pair.min_rate_mbps, maximise=True)


def available_filters():
    return_filters = {}
    filter_libs = [
        MinLifetimeFilter,
        MinOrbitHopsFilter,
        MaxMinVisibilityFilter,
        MinAccessDelayFilter,
        MaxMinAccessRateFilter,
    ]
    for filter_class in filter_libs:
        filter_lib = filter_class({})
        for details in filter_lib.provides().values():
            return_filters[details['id']] = filter_lib
    return return_filters


def _tie_break_key(pair):
    return satellite_sort_key(pair.gss), satellite_sort_key(pair.uss)


def filter_candidates(pairs, sequence, cfg):
    """
    Apply the filters of a sequence in order and reduce the survivors to at most one pair.

    :param pairs:       iterable of CandidatePair
    :param sequence:    ordered filter ids
    :param cfg:         HandoverConfig
    :return:            list holding zero or one CandidatePair
    """
    filters = available_filters()
    survivors = list(pairs)
    for filter_id in sequence:
        survivors = filters[filter_id].apply(survivors, cfg)
        logger.debug("Filter %s leaves %s candidate pairs", filter_id, len(survivors))
        if not survivors:
            return []
    # Lowest (gss, uss) satellite ids win the remaining ties
    return [min(survivors, key=_tie_break_key)]
