#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import datetime
import os

import pytest

from leo_emulator.lib.agent import available_route_plugins, deploy_agents, load_route_plugin
from leo_emulator.lib.errors import UnknownNodeError
from leo_emulator.lib.linkmodel import LinkAttributes
from leo_emulator.lib.scenario import EpochFile, LinkRecord, build_node_configs, load_sat_config
from leo_emulator.lib.statestore import KeyValueStore, apply_epoch, load_static_config, run_key

EPOCH_ZERO = datetime.datetime(2023, 10, 1, tzinfo=datetime.timezone.utc)

SAT1 = "2001:db8:100::3"
SAT2 = "2001:db8:100::7"
GRD1 = "2001:db8:200::3"
USR1 = "2001:db8:300::3"


@pytest.fixture
def store(scenarios_dir):
    sat_config = load_sat_config(os.path.join(scenarios_dir, "sat-config-example.json"))
    nodes, assignments = build_node_configs(sat_config)
    kv = KeyValueStore()
    load_static_config(kv, nodes, assignments)
    return kv


def link_epoch(seconds, add=(), delete=()):
    return EpochFile(time=EPOCH_ZERO + datetime.timedelta(seconds=seconds),
                     links_add=[LinkRecord(a, b, LinkAttributes(100.0, 5.0)) for a, b in add],
                     links_del=list(delete))


class TestRoutePlugins(object):

    def test_registry(self):
        plugins = available_route_plugins()
        assert set(plugins) == {'extra.routing.localroutes6', 'extra.routing.localroutes4', 'none'}

    def test_unknown_module_falls_back(self):
        plugin = load_route_plugin({"L3-config": {"enable-routing": True, "routing-module": "extra.routing.isisv6"}})
        assert 'none' in plugin.provides()

    def test_disabled_routing(self):
        plugin = load_route_plugin({"L3-config": {"enable-routing": False,
                                                  "routing-module": "extra.routing.localroutes6"}})
        assert 'none' in plugin.provides()


class TestNodeAgents(object):

    def test_plugins_per_node(self, store):
        pool = deploy_agents(store)
        assert pool['grd1'].plugin_name == 'extra.routing.localroutes6'
        assert pool['sat1'].plugin_name == 'none'
        assert pool['usr1'].plugin_name == 'none'
        assert set(pool) == {'sat1', 'sat2', 'grd1', 'usr1'}
        pool.stop()

    def test_unknown_node(self, store):
        pool = deploy_agents(store)
        with pytest.raises(UnknownNodeError):
            pool['sat9']
        assert pool.get('sat9') is None
        pool.stop()

    def test_links_mirror_the_store(self, store):
        pool = deploy_agents(store)
        apply_epoch(store, link_epoch(0, add=[('sat1', 'sat2'), ('sat1', 'grd1')]))
        assert set(pool['sat1'].links) == {'sat2', 'grd1'}
        assert set(pool['grd1'].links) == {'sat1'}
        assert pool.link_tables()['sat2'] == {'sat1': LinkAttributes(100.0, 5.0)}
        pool.stop()

    def test_local_routes_follow_links(self, store):
        pool = deploy_agents(store)
        apply_epoch(store, link_epoch(0, add=[('sat1', 'grd1')]))
        assert pool['grd1'].get('sat1') == 'sat1'
        assert pool['grd1'].routes[SAT1].next_hop == 'sat1'
        apply_epoch(store, link_epoch(5, delete=[('sat1', 'grd1')]))
        assert pool['grd1'].get('sat1') is None
        pool.stop()

    def test_links_present_before_start(self, store):
        apply_epoch(store, link_epoch(0, add=[('sat1', 'sat2')]))
        pool = deploy_agents(store)
        assert 'sat2' in pool['sat1'].links
        pool.stop()

    def test_route_tasks(self, store):
        pool = deploy_agents(store)
        apply_epoch(store, link_epoch(0, add=[('sat1', 'sat2'), ('sat1', 'grd1')]))
        store.put(run_key('sat1'), [
            "ip -6 route replace {} via {}".format(USR1, SAT2),
            "ip -6 route replace {} via {}".format(GRD1, USR1),
            "echo hello",
        ])
        agent = pool['sat1']
        assert [entry['status'] for entry in agent.task_log] == ['ok', 'skipped', 'unknown']
        assert agent.get('usr1') == 'sat2'
        store.put(run_key('sat1'), ["ip -6 route del {}".format(USR1)])
        assert agent.get('usr1') is None
        pool.stop()

    def test_lost_neighbour_drops_its_routes(self, store):
        pool = deploy_agents(store)
        apply_epoch(store, link_epoch(0, add=[('sat1', 'sat2')]))
        store.put(run_key('sat1'), ["ip -6 route replace {} via {}".format(GRD1, SAT2)])
        assert pool['sat1'].get('grd1') == 'sat2'
        apply_epoch(store, link_epoch(5, delete=[('sat1', 'sat2')]))
        assert pool['sat1'].get('grd1') is None
        pool.stop()

    def test_threaded_agents(self, store):
        pool = deploy_agents(store, threaded=True)
        try:
            apply_epoch(store, link_epoch(0, add=[('sat1', 'grd1')]))
            pool.wait_idle()
            assert pool['grd1'].get('sat1') == 'sat1'
            assert 'grd1' in pool['sat1'].links
        finally:
            pool.stop()
