#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.route_plugins.no_routing.py

    Written by:               LEO Emulator contributors
    Date:                     10 Mar 2026, (12:05 PM)

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


class NoRoutingPlugin:

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "none": {
                "label": "No dynamic routing, routes only come from epoch tasks",
            },
        }

    def options(self):
        return {}

    def on_link_add(self, node, peer, attributes):
        return []

    def on_link_update(self, node, peer, attributes):
        return []

    def on_link_del(self, node, peer, attributes):
        return []
