#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.agent.py

    Written by:               LEO Emulator contributors
    Date:                     10 Mar 2026, (3:15 PM)

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
import queue
import re
import threading

from leo_emulator.lib.errors import UnknownNodeError
from leo_emulator.lib.linkmodel import LinkAttributes
from leo_emulator.lib.route_plugins.local_routes import LocalRoutesPlugin
from leo_emulator.lib.route_plugins.no_routing import NoRoutingPlugin
from leo_emulator.lib.routing import RouteEntry, RouteOrigin
from leo_emulator.lib.statestore import link_prefix, node_key, run_key, split_link_store_key

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")

ROUTE_TASK_REGEX = re.compile(r'^(?:ip\s+(?:-[46]\s+)?)?route\s+(replace|add|del|delete)\s+(\S+)(?:\s+via\s+(\S+))?\s*$')

HOSTS_PREFIXES = ("/config/etchosts6/", "/config/etchosts4/")


def available_route_plugins():
    return_plugins = {}
    plugin_libs = [
        LocalRoutesPlugin,
        NoRoutingPlugin,
    ]
    for plugin_class in plugin_libs:
        plugin_lib = plugin_class({})
        for plugin in plugin_lib.provides():
            return_plugins[plugin] = plugin_class
    return return_plugins


def load_route_plugin(node_config):
    """
    Routing plug-in named by a node's L3 config. Unknown modules fall back to 'none'.

    :param node_config: node configuration dict as stored under /config/nodes/
    :return:
    """
    l3_config = (node_config or {}).get('L3-config', {})
    module = l3_config.get('routing-module') if l3_config.get('enable-routing') else 'none'
    plugins = available_route_plugins()
    if module not in plugins:
        logger.warning("Routing module '%s' is not available, node runs without dynamic routing", module)
        module = 'none'
    return plugins[module]({})


class NodeAgent(object):
    """
    Reactive per-node agent mirroring the node's link subtree and executing its tasks.
    """

    def __init__(self, name, store, plugin=None):
        self.name = name
        self.store = store
        self.plugin = plugin if plugin is not None else NoRoutingPlugin({})
        self.links = {}
        # Installed routes keyed by destination address
        self.routes = {}
        # Same routes keyed by destination node name
        self.next_hops = {}
        self.task_log = []
        self.inbox = queue.Queue()
        self.watchers = []
        self.hosts = {}
        self.addresses = {}

    @property
    def plugin_name(self):
        return next(iter(self.plugin.provides()))

    def load_hosts(self):
        for prefix in HOSTS_PREFIXES:
            for key, address in self.store.get_prefix(prefix).items():
                name = key[len(prefix):]
                # IPv6 loopbacks win when both families are assigned
                self.hosts.setdefault(name, address)
                self.addresses[address] = name

    def loopback_of(self, node):
        return self.hosts.get(node, node)

    def node_of(self, address):
        return self.addresses.get(address, address)

    def start(self, threaded=False):
        """
        Subscribe to the node's links and tasks and load links already in the store.

        :param threaded:    queue events in the inbox for a consumer thread instead of handling them inline
        :return:
        """
        self.load_hosts()
        deliver = self.inbox.put if threaded else self.on_event
        self.watchers = [
            self.store.watch_prefix(link_prefix(self.name), callback=deliver),
            self.store.watch_prefix(run_key(self.name), callback=deliver),
        ]
        for key, value in self.store.get_prefix(link_prefix(self.name)).items():
            endpoints = split_link_store_key(key)
            if endpoints is not None and endpoints[1] not in self.links:
                self.__link_added(endpoints[1], LinkAttributes.from_record(value))

    def stop(self):
        for watcher in self.watchers:
            watcher.cancel()
        self.watchers = []

    def run(self, stop_event):
        while not stop_event.is_set():
            try:
                event = self.inbox.get(timeout=0.1)
            except queue.Empty:
                continue
            try:
                self.on_event(event)
            except Exception as e:
                logger.exception("Agent '%s' failed handling '%s': %s", self.name, event.key, e)
            finally:
                self.inbox.task_done()

    def on_event(self, event):
        agent_on_event(self, event)

    def forwarding_table(self):
        return dict(self.next_hops)

    def get(self, destination, default=None):
        return self.next_hops.get(destination, default)

    def set_route(self, entry):
        self.routes[entry.destination] = entry
        self.next_hops[self.node_of(entry.destination)] = entry.next_hop
        logger.debug("Node '%s' route %s via %s (%s)", self.name, entry.destination, entry.next_hop,
                     entry.origin.value)

    def drop_route(self, destination):
        entry = self.routes.pop(destination, None)
        if entry is not None:
            self.next_hops.pop(self.node_of(destination), None)
        return entry

    def apply_mutations(self, mutations):
        for mutation in mutations:
            if mutation.action == 'replace':
                self.set_route(mutation.entry)
            elif mutation.action == 'delete':
                self.drop_route(mutation.destination)

    def __link_added(self, peer, attributes):
        self.links[peer] = attributes
        self.apply_mutations(self.plugin.on_link_add(self, peer, attributes))

    def handle_link(self, peer, value):
        if value is None:
            attributes = self.links.pop(peer, None)
            if attributes is None:
                return
            self.apply_mutations(self.plugin.on_link_del(self, peer, attributes))
            # Anything still forwarded through the lost neighbour is gone with the link
            for destination in [d for d, entry in self.routes.items() if entry.next_hop == peer]:
                self.drop_route(destination)
            return
        attributes = LinkAttributes.from_record(value)
        if peer not in self.links:
            self.__link_added(peer, attributes)
        else:
            self.links[peer] = attributes
            self.apply_mutations(self.plugin.on_link_update(self, peer, attributes))

    def execute(self, command, revision=None):
        """
        Execute one task. Route tasks change the route table, anything else is only logged.

        :param command:
        :param revision:
        :return: task status
        """
        match = ROUTE_TASK_REGEX.match(command.strip())
        if not match:
            logger.warning("Node '%s' does not recognise task '%s'", self.name, command)
            status = 'unknown'
        else:
            action, destination, via = match.groups()
            address = self.loopback_of(self.node_of(destination))
            if action in ('replace', 'add'):
                next_hop = self.node_of(via) if via else None
                if next_hop is None or next_hop not in self.links:
                    logger.warning("Node '%s' skipped '%s': next hop '%s' is not linked", self.name, command, next_hop)
                    status = 'skipped'
                else:
                    self.set_route(RouteEntry(address, next_hop, RouteOrigin.ORACLE))
                    status = 'ok'
            else:
                self.drop_route(address)
                status = 'ok'
        self.task_log.append({"revision": revision, "command": command, "status": status})
        return status


def agent_on_event(agent, event):
    """
    React to a store event under the agent's link or task keys

    :param agent:
    :param event:   WatchEvent
    :return:
    """
    endpoints = split_link_store_key(event.key)
    if endpoints is not None and endpoints[0] == agent.name:
        agent.handle_link(endpoints[1], event.new)
    elif event.key == run_key(agent.name):
        for command in event.new or []:
            agent.execute(command, revision=event.revision)


class AgentPool(object):
    """
    The deployed agents, handling events inline or on one thread per agent.
    """

    def __init__(self, agents, threaded=False):
        self.agents = agents
        self.threaded = threaded
        self.stop_event = threading.Event()
        self.threads = []

    def __getitem__(self, name):
        if name not in self.agents:
            raise UnknownNodeError("No agent deployed for node '{}'".format(name))
        return self.agents[name]

    def __contains__(self, name):
        return name in self.agents

    def __iter__(self):
        return iter(self.agents)

    def get(self, name, default=None):
        return self.agents.get(name, default)

    def start(self):
        for name, agent in self.agents.items():
            agent.start(threaded=self.threaded)
            if self.threaded:
                thread = threading.Thread(target=agent.run, args=(self.stop_event,), name="agent-{}".format(name),
                                          daemon=True)
                thread.start()
                self.threads.append(thread)

    def wait_idle(self):
        for agent in self.agents.values():
            agent.inbox.join()

    def stop(self):
        self.stop_event.set()
        for thread in self.threads:
            thread.join()
        for agent in self.agents.values():
            agent.stop()

    def link_tables(self):
        return {name: dict(agent.links) for name, agent in self.agents.items()}


def deploy_agents(store, threaded=False):
    """
    Instantiate and start one agent per node found in the store

    :param store:
    :param threaded:
    :return: AgentPool
    """
    agents = {}
    for name in store.node_names():
        agents[name] = NodeAgent(name, store, plugin=load_route_plugin(store.get(node_key(name))))
    pool = AgentPool(agents, threaded=threaded)
    pool.start()
    logger.info("Deployed %s node agents", len(agents))
    return pool
