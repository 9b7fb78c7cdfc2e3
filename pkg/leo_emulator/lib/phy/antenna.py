#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.phy.antenna.py

    Written by:               LEO Emulator contributors
    Date:                     04 Mar 2026, (8:52 AM)

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


class AllVisibleAntenna:
    """
    Keeps every visible satellite. Serving-satellite selection for users happens in the control plane.
    """

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "all-visible": {
                "attribute": "antenna",
                "label":     "Every visible satellite is linked",
            },
        }

    def options(self):
        return {}

    def select(self, ground, candidates):
        """
        :param ground:      GroundNode
        :param candidates:  list of (flat satellite id, elevation_deg)
        :return:            list of flat satellite ids kept
        """
        return sorted(flat for flat, _ in candidates)


class MaxAntennas:

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "max-antennas": {
                "attribute": "antenna",
                "label":     "Highest-elevation satellites up to the node antenna count",
            },
        }

    def options(self):
        return {}

    def select(self, ground, candidates):
        # Highest elevation first, lower satellite id wins ties
        ranked = sorted(candidates, key=lambda candidate: (-candidate[1], candidate[0]))
        return sorted(flat for flat, _ in ranked[:ground.max_antennas])
