#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.tools.py

    Written by:               LEO Emulator contributors
    Date:                     02 Mar 2026, (9:31 AM)

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
import datetime
import math
import re

from leo_emulator.lib.errors import ConfigurationError

memory_units = {
    '':    1,
    'k':   1000,
    'm':   1000 ** 2,
    'g':   1000 ** 3,
    't':   1000 ** 4,
    'ki':  1024,
    'mi':  1024 ** 2,
    'gi':  1024 ** 3,
    'ti':  1024 ** 4,
}

rate_units = {
    'bit':  1e-6,
    'kbit': 1e-3,
    'mbit': 1.0,
    'gbit': 1e3,
}

delay_units = {
    'us': 1e-3,
    'ms': 1.0,
    's':  1e3,
}

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
TIMESTAMP_FORMAT_FRACTION = "%Y-%m-%dT%H:%M:%S.%fZ"

_quantity_regex = re.compile(r'^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([A-Za-z%]*)\s*$')


def _split_quantity(value, field):
    match = _quantity_regex.match(str(value))
    if not match:
        raise ConfigurationError("Unable to parse quantity '{}' for '{}'".format(value, field), field=field)
    return float(match.group(1)), match.group(2)


def parse_cpu(value):
    """
    Parse a Kubernetes style cpu quantity ("100m", "0.5", 2) into cores

    :param value:
    :return:
    """
    if value is None or value == '':
        return 0.0
    number, suffix = _split_quantity(value, 'cpu')
    if suffix == 'm':
        return number / 1000.0
    if suffix:
        raise ConfigurationError("Unknown cpu unit '{}'".format(suffix), field='cpu')
    return number


def parse_mem(value):
    """
    Parse a memory quantity ("100MiB", "8GiB", "512Mi", 1048576) into bytes

    :param value:
    :return:
    """
    if value is None or value == '':
        return 0
    number, suffix = _split_quantity(value, 'mem')
    unit = suffix.lower()
    if unit.endswith('b'):
        unit = unit[:-1]
    if unit not in memory_units:
        raise ConfigurationError("Unknown memory unit '{}'".format(suffix), field='mem')
    return int(round(number * memory_units[unit]))


def parse_rate(value):
    """
    Parse a tc style rate ("400mbit", "23.0mbit") into Mbit/s

    :param value:
    :return:
    """
    if isinstance(value, (int, float)):
        return float(value)
    number, suffix = _split_quantity(value, 'rate')
    unit = suffix.lower() or 'mbit'
    if unit not in rate_units:
        raise ConfigurationError("Unknown rate unit '{}'".format(suffix), field='rate')
    return number * rate_units[unit]


def parse_delay(value):
    """
    Parse a tc style delay ("3ms", "3.0ms", "1s") into milliseconds

    :param value:
    :return:
    """
    if isinstance(value, (int, float)):
        return float(value)
    number, suffix = _split_quantity(value, 'delay')
    unit = suffix.lower() or 'ms'
    if unit not in delay_units:
        raise ConfigurationError("Unknown delay unit '{}'".format(suffix), field='delay')
    return number * delay_units[unit]


def parse_loss(value):
    """
    Parse a loss percentage (0, "0.0", "0.1%") into a fraction in [0, 1]

    :param value:
    :return:
    """
    if value is None or value == '':
        return 0.0
    if isinstance(value, (int, float)):
        return float(value) / 100.0
    number, suffix = _split_quantity(value, 'loss')
    if suffix not in ('', '%'):
        raise ConfigurationError("Unknown loss unit '{}'".format(suffix), field='loss')
    return number / 100.0


def format_mem(value_bytes):
    for suffix, unit in (('GiB', memory_units['gi']), ('MiB', memory_units['mi']), ('KiB', memory_units['ki'])):
        if value_bytes and value_bytes % unit == 0:
            return "{}{}".format(value_bytes // unit, suffix)
    return str(int(value_bytes))


def format_rate(rate_mbps):
    return "{:.1f}mbit".format(rate_mbps)


def format_delay(delay_ms):
    return "{:.1f}ms".format(delay_ms)


def format_loss(loss_fraction):
    # Serialised as a percentage, the way tc-netem expects it
    return "{:.1f}".format(loss_fraction * 100.0)


def quantize(value, quantum):
    """
    Round a value to the nearest multiple of quantum (halves round up)

    :param value:
    :param quantum:
    :return:
    """
    if quantum <= 0:
        raise ConfigurationError("Quantum must be positive, got {}".format(quantum), field='quantum')
    return math.floor(value / quantum + 0.5) * quantum


def format_timestamp(value):
    if value.microsecond:
        return value.strftime(TIMESTAMP_FORMAT_FRACTION)
    return value.strftime(TIMESTAMP_FORMAT)


def parse_timestamp(value):
    """
    Parse an ISO-8601 UTC timestamp with a 'Z' suffix into an aware datetime

    :param value:
    :return:
    """
    if isinstance(value, datetime.datetime):
        return value
    for timestamp_format in (TIMESTAMP_FORMAT, TIMESTAMP_FORMAT_FRACTION):
        try:
            parsed = datetime.datetime.strptime(value, timestamp_format)
            return parsed.replace(tzinfo=datetime.timezone.utc)
        except (TypeError, ValueError):
            continue
    raise ConfigurationError("Unable to parse timestamp '{}'".format(value), field='time')


def natural_sort_key(name):
    """
    Sort key that orders 'sat2' before 'sat10'

    :param name:
    :return:
    """
    return [int(part) if part.isdigit() else part for part in re.split(r'(\d+)', str(name))]


def config_matches(config, match_key, match_value):
    """
    Test a key:value matching rule against a node configuration.
    Values are compared as strings so that "true" matches True and "1" matches 1.

    :param config:
    :param match_key:
    :param match_value:
    :return:
    """
    if match_key not in config:
        return False
    current = config.get(match_key)
    if isinstance(current, bool):
        current = 'true' if current else 'false'
    if isinstance(match_value, bool):
        match_value = 'true' if match_value else 'false'
    return str(current) == str(match_value)


def deep_merge(base, overrides):
    """
    Return a new dict with overrides merged recursively on top of base

    :param base:
    :param overrides:
    :return:
    """
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged
