#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.errors.py

    Written by:               LEO Emulator contributors
    Date:                     02 Mar 2026, (9:20 AM)

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


class LeoEmulatorError(Exception):
    """Base class for every error raised by the emulator"""


class ConfigurationError(LeoEmulatorError):

    def __init__(self, message, field=None):
        super(ConfigurationError, self).__init__(message)
        self.field = field


class CapacityError(LeoEmulatorError):

    def __init__(self, message, shortfall=None):
        super(CapacityError, self).__init__(message)
        # Mapping of worker name -> {'cpu': missing cores, 'mem': missing bytes}
        self.shortfall = shortfall or {}


class DomainError(LeoEmulatorError, ValueError):
    pass


class PhyPipelineError(LeoEmulatorError):

    def __init__(self, message, plugin=None):
        super(PhyPipelineError, self).__init__(message)
        self.plugin = plugin


class EpochFormatError(LeoEmulatorError):

    def __init__(self, message, file_name=None, line=None, column=None):
        super(EpochFormatError, self).__init__(message)
        self.file_name = file_name
        self.line = line
        self.column = column


class UnknownNodeError(LeoEmulatorError, KeyError):

    def __str__(self):
        # KeyError would otherwise quote the message
        return str(self.args[0]) if self.args else ''


class RoutingLoopError(LeoEmulatorError):

    def __init__(self, message, cycle=None):
        super(RoutingLoopError, self).__init__(message)
        self.cycle = list(cycle or [])


class UnreachableError(LeoEmulatorError):

    def __init__(self, message, source=None, destination=None):
        super(UnreachableError, self).__init__(message)
        self.source = source
        self.destination = destination


class RegistrationError(LeoEmulatorError):
    pass


class ScenarioInconsistencyError(LeoEmulatorError):

    def __init__(self, message, epoch_index=None):
        super(ScenarioInconsistencyError, self).__init__(message)
        self.epoch_index = epoch_index


class SelectorError(LeoEmulatorError):

    def __init__(self, message, valid_keys=None):
        super(SelectorError, self).__init__(message)
        self.valid_keys = sorted(valid_keys or [])
