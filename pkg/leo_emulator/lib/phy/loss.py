#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.phy.loss.py

    Written by:               LEO Emulator contributors
    Date:                     04 Mar 2026, (8:35 AM)

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


class FixedLoss:

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "fixed-loss": {
                "attribute": "loss",
                "label":     "Constant random packet loss",
            },
        }

    def options(self):
        return {
            "loss_fraction": 0.0,
        }

    def evaluate(self, ctx):
        return float(self.settings.get('loss_fraction', self.options()['loss_fraction']))
