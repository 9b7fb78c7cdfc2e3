#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.settings.py

    Written by:               LEO Emulator contributors
    Date:                     02 Mar 2026, (10:02 AM)

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
import copy
import json
import logging
import os

from leo_emulator.lib import tools
from leo_emulator.lib.errors import ConfigurationError
from leo_emulator.lib.global_settings import GlobalSettings

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")

# Groups whose value replaces the default wholesale instead of being merged key by key
replaced_groups = ['node-config-common', 'workers']


class Settings(object):
    """
    Scenario and experiment settings.
    Defaults come from GlobalSettings.options() and are overridden by a JSON generator config.
    """

    def __init__(self, config=None, path=None):
        self.path = path
        if path is not None:
            config = self.__load_config_file(path)
        self.settings = self.__build_settings_object(config or {})
        self.global_settings = GlobalSettings(self)

    @staticmethod
    def __load_config_file(path):
        try:
            with open(path, 'r') as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                "Config file '{}' is not valid JSON (line {}, column {})".format(path, e.lineno, e.colno))
        except OSError as e:
            raise ConfigurationError("Unable to read config file '{}': {}".format(path, e))

    @staticmethod
    def __build_settings_object(config):
        defaults = GlobalSettings.options()
        for key in config:
            if key not in defaults:
                raise ConfigurationError("Unknown configuration group '{}'".format(key), field=key)
        settings = {}
        for group, default_values in defaults.items():
            if group not in config:
                settings[group] = default_values
            elif group in replaced_groups or not isinstance(default_values, dict):
                settings[group] = copy.deepcopy(config[group])
            else:
                settings[group] = tools.deep_merge(default_values, config[group])
        return settings

    def get_setting(self, key=None):
        """
        Fetch a setting by dotted key, eg. 'handover.t_lt_s'.
        With no key, the whole settings object is returned.

        :param key:
        :return:
        """
        if key is None:
            return self.settings
        value = self.settings
        for part in key.split('.'):
            if not isinstance(value, dict) or part not in value:
                raise ConfigurationError("Unknown setting '{}'".format(key), field=key)
            value = value[part]
        return value

    def set_setting(self, key, value):
        parts = key.split('.')
        target = self.settings
        for part in parts[:-1]:
            target = target.setdefault(part, {})
        target[parts[-1]] = value

    def base_dir(self):
        """
        Directory relative paths in the config are resolved against

        :return:
        """
        if self.path:
            return os.path.dirname(os.path.abspath(self.path))
        return os.getcwd()

    def resolve_path(self, path):
        if os.path.isabs(path):
            return path
        return os.path.join(self.base_dir(), path)

    def dump(self):
        return copy.deepcopy(self.settings)
