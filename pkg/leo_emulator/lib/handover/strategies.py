#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.handover.strategies.py

    Written by:               LEO Emulator contributors
    Date:                     12 Mar 2026, (10:02 AM)

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
import logging

from leo_emulator.lib.handover.filters import filter_candidates
from leo_emulator.lib.orbit import satellite_sort_key

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")


def min_access_delay_satellite(visible):
    """
    Visible satellite with the lowest access delay, lowest id on ties

    :param visible: dict of satellite name -> LinkAttributes
    :return:
    """
    if not visible:
        return None
    return min(visible, key=lambda sat: (visible[sat].delay_ms, satellite_sort_key(sat)))


class LocalMinAccessDelay:
    """
    User and gateway each move to a satellite offering a strictly lower access delay.
    """

    # Evaluated at every control interval, without lifetime or elapsed-time triggers
    uses_triggers = False

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "local-min-delay": {
                "label": "Independent minimum access delay at user and gateway",
            },
        }

    @staticmethod
    def __local_choice(current, visible):
        best = min_access_delay_satellite(visible)
        if best is None:
            return current
        if current not in visible or visible[best].delay_ms < visible[current].delay_ms:
            return best
        return current

    def select(self, session, view, t, cfg):
        """
        :return: (gss, uss) or None to keep the current pair
        """
        uss = self.__local_choice(session.uss, view.visible(session.user))
        gss = self.__local_choice(session.gss, view.visible(session.gateway))
        return gss, uss

    def registration_gss(self, user, uss, gateway, view, t, cfg):
        return min_access_delay_satellite(view.visible(gateway))


class EndToEnd:
    """
    Gateway-driven selection of the GSS-USS pair through an ordered filter sequence.
    """

    uses_triggers = True

    def __init__(self, settings):
        self.settings = settings
        self.sequence = [int(filter_id) for filter_id in settings.get('sequence', [1, 2, 4])]

    def provides(self):
        return {
            "e2e": {
                "label": "End-to-end candidate pair filtering",
            },
        }

    def select(self, session, view, t, cfg):
        pairs = view.candidate_pairs(session.user, session.gateway, t)
        selected = filter_candidates(pairs, self.sequence, cfg)
        if not selected:
            logger.debug("No candidate pair survives filters %s for '%s', keeping the current pair", self.sequence,
                         session.name)
            return None
        return selected[0].gss, selected[0].uss

    def registration_gss(self, user, uss, gateway, view, t, cfg):
        pairs = view.candidate_pairs(user, gateway, t, uss_only=uss)
        selected = filter_candidates(pairs, self.sequence, cfg)
        if selected:
            return selected[0].gss
        return min_access_delay_satellite(view.visible(gateway))
