#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import datetime
import os

import networkx as nx
import numpy as np
import pytest

from leo_emulator.harness import node_classes_of
from leo_emulator.lib.errors import ConfigurationError, RoutingLoopError, UnreachableError
from leo_emulator.lib.linkmodel import LinkAttributes
from leo_emulator.lib.routing import OracleConfig, ShortestPathTables, link_graph, next_hops_to, oracle_compute, \
    resolve_path, route_task
from leo_emulator.lib.scenario import EpochFile, LinkRecord, generate_scenario, link_key, replay_link_sets
from leo_emulator.lib.settings import Settings

EPOCH_ZERO = datetime.datetime(2023, 10, 1, tzinfo=datetime.timezone.utc)

RING = [('sat1', 'sat2'), ('sat2', 'sat3'), ('sat3', 'sat4'), ('sat1', 'sat4')]

CLASSES = {
    'sat1': 'satellite',
    'sat2': 'satellite',
    'sat3': 'satellite',
    'sat4': 'satellite',
    'grd1': 'gateway',
}


def link_set(pairs, delay_ms=5.0):
    return {pair: LinkAttributes(100.0, delay_ms) for pair in pairs}


def epoch(seconds, add=(), delete=(), index=None):
    return EpochFile(time=EPOCH_ZERO + datetime.timedelta(seconds=seconds),
                     links_add=[LinkRecord(a, b, LinkAttributes(100.0, 5.0)) for a, b in add],
                     links_del=list(delete), index=index)


def draining_ring():
    return [
        epoch(0, add=RING + [('sat1', 'grd1')], index=0),
        epoch(5, delete=[('sat1', 'sat2')], index=1),
        epoch(10, index=2),
    ]


class TestNextHops(object):

    def test_equal_cost_tie_break(self):
        graph = link_graph(link_set([('sat1', 'sat2'), ('sat1', 'sat3'), ('sat2', 'sat4'), ('sat3', 'sat4')]))
        routes = next_hops_to(graph, 'sat4', ['sat1'], CLASSES, 'hop-count')
        assert routes == {'sat1': ('sat2', 2)}

    def test_ground_nodes_do_not_forward(self):
        graph = link_graph(link_set([('sat1', 'grd1'), ('sat2', 'grd1')]))
        assert next_hops_to(graph, 'sat2', ['sat1'], CLASSES, 'hop-count') == {}
        # The ground node itself is still a valid destination
        assert next_hops_to(graph, 'grd1', ['sat1'], CLASSES, 'hop-count') == {'sat1': ('grd1', 1)}

    def test_metrics(self):
        links = {
            ('sat1', 'sat2'): LinkAttributes(100.0, 1.0),
            ('sat2', 'sat4'): LinkAttributes(100.0, 1.0),
            ('sat1', 'sat4'): LinkAttributes(100.0, 5.0),
        }
        by_hops = next_hops_to(link_graph(links), 'sat4', ['sat1'], CLASSES, 'hop-count')
        by_delay = next_hops_to(link_graph(links, 'propagation-delay'), 'sat4', ['sat1'], CLASSES,
                                'propagation-delay')
        assert by_hops['sat1'] == ('sat4', 1)
        assert by_delay['sat1'] == ('sat2', pytest.approx(2.0))

    def test_unknown_destination(self):
        assert next_hops_to(link_graph(link_set(RING)), 'sat9', ['sat1'], CLASSES, 'hop-count') == {}

    @pytest.mark.parametrize("seed", range(5))
    def test_costs_match_networkx(self, seed):
        rng = np.random.default_rng(seed)
        random_graph = nx.gnp_random_graph(12, 0.3, seed=seed)
        links = {}
        for a, b in random_graph.edges():
            links[('sat{}'.format(a + 1), 'sat{}'.format(b + 1))] = LinkAttributes(100.0, float(rng.uniform(1, 10)))
        classes = {'sat{}'.format(n + 1): 'satellite' for n in range(12)}
        for metric, weight in (('hop-count', None), ('propagation-delay', 'weight')):
            graph = link_graph(links, metric)
            tables = {}
            for destination in graph:
                routes = next_hops_to(graph, destination, list(graph), classes, metric)
                for source, (next_hop, cost) in routes.items():
                    tables.setdefault(source, {})[destination] = next_hop
                    assert cost == pytest.approx(nx.shortest_path_length(graph, source, destination, weight=weight))
                for source in graph:
                    if source != destination and nx.has_path(graph, source, destination):
                        assert source in routes
            for source in graph:
                for destination in graph:
                    if source == destination or not nx.has_path(graph, source, destination):
                        continue
                    path = resolve_path(tables, source, destination)
                    length = nx.path_weight(graph, path, weight='weight')
                    assert length == pytest.approx(nx.shortest_path_length(graph, source, destination, weight=weight))


class TestResolvePath(object):

    def test_follows_next_hops(self):
        tables = {'a': {'c': 'b'}, 'b': {'c': 'c'}}
        assert resolve_path(tables, 'a', 'c') == ['a', 'b', 'c']
        assert resolve_path(tables, 'c', 'c') == ['c']

    def test_loop(self):
        with pytest.raises(RoutingLoopError) as error:
            resolve_path({'a': {'c': 'b'}, 'b': {'c': 'a'}}, 'a', 'c')
        assert error.value.cycle == ['a', 'b', 'a']

    def test_missing_route(self):
        with pytest.raises(UnreachableError) as error:
            resolve_path({'a': {'c': 'b'}}, 'a', 'c')
        assert error.value.destination == 'c'


class TestOracleConfig(object):

    def test_defaults_from_settings(self):
        cfg = OracleConfig.from_settings(Settings())
        assert cfg.metric == 'hop-count'
        assert ('satellite', 'gateway') in cfg.pair_classes

    def test_unknown_metric(self):
        with pytest.raises(ConfigurationError) as error:
            OracleConfig(metric='widest-path')
        assert error.value.field == 'metric'

    def test_drain_must_align_with_epochs(self):
        with pytest.raises(ConfigurationError):
            OracleConfig.from_settings(Settings(config={"routing": {"drain_lead_s": 7.0}}))


class TestOracleCompute(object):

    def test_links_about_to_break_are_avoided(self):
        result = oracle_compute(draining_ring(), CLASSES, OracleConfig(), keep_tables=True)
        assert result.tables[0]['sat2']['sat1'] == 'sat3'
        assert result.tables[0]['sat1']['sat2'] == 'sat4'
        assert result.tables[0]['sat2']['grd1'] == 'sat3'
        assert 'grd1' not in result.tables[0]
        assert result.reachability == []

    def test_without_drain(self):
        result = oracle_compute(draining_ring(), CLASSES, OracleConfig(drain_lead_s=0.0), keep_tables=True)
        assert result.tables[0]['sat2']['sat1'] == 'sat1'
        assert result.tables[1]['sat2']['sat1'] == 'sat3'

    def test_tasks_only_on_change(self):
        epochs = draining_ring()
        result = oracle_compute(epochs, CLASSES, OracleConfig(), loopbacks={'sat1': '2001:db8:100::3'})
        augmented = result.epoch_files
        assert route_task('2001:db8:100::3', 'sat3') in augmented[0].run['sat2']
        assert augmented[1].run == {}
        assert augmented[2].run == {}
        assert result.task_count == sum(len(commands) for commands in augmented[0].run.values())
        assert epochs[0].run == {}

    def test_fallback_keeps_reachability(self):
        epochs = [
            epoch(0, add=[('sat1', 'sat2')], index=0),
            epoch(5, delete=[('sat1', 'sat2')], index=1),
        ]
        classes = {'sat1': 'satellite', 'sat2': 'satellite'}
        result = oracle_compute(epochs, classes, OracleConfig(), keep_tables=True)
        assert result.tables[0]['sat1']['sat2'] == 'sat2'
        assert {entry['epoch'] for entry in result.reachability} == {1}

    def test_isolated_node(self):
        classes = dict(CLASSES, sat5='satellite')
        result = oracle_compute(draining_ring(), classes, OracleConfig())
        assert len(result.reachability) == 3 * 9
        for entry in result.reachability:
            assert 'sat5' in (entry['source'], entry['destination'])

    def test_no_epochs(self):
        result = oracle_compute([], CLASSES, OracleConfig())
        assert result.epoch_files == [] and result.task_count == 0


class TestShortestPathTables(object):

    def test_lazy_tables(self):
        tables = ShortestPathTables(link_set(RING + [('sat1', 'grd1'), ('sat3', 'grd1')]), CLASSES)
        assert tables.get('sat2').get('sat1') == 'sat1'
        assert tables.get('sat1').get('sat3') == 'sat2'
        assert tables.get('sat9') is None
        assert resolve_path(tables, 'sat2', 'grd1') == ['sat2', 'sat1', 'grd1']

    def test_unreachable(self):
        tables = ShortestPathTables(link_set([('sat1', 'sat2'), ('sat3', 'sat4')]), CLASSES)
        assert tables.get('sat1').get('sat4') is None
        with pytest.raises(UnreachableError):
            resolve_path(tables, 'sat1', 'sat4')


def smoke_epochs(scenarios_dir, duration_s=600.0):
    settings = Settings(path=os.path.join(scenarios_dir, "smoke.json"))
    settings.set_setting('epoch.duration_s', duration_s)
    sat_config, epochs = generate_scenario(settings)
    return settings, node_classes_of(sat_config), epochs


class TestSmokeScenarioRoutes(object):

    @pytest.mark.parametrize("metric", ['hop-count', 'propagation-delay'])
    def test_costs_match_shortest_paths_every_epoch(self, scenarios_dir, metric):
        _, classes, epochs = smoke_epochs(scenarios_dir)
        satellites = sorted(name for name, kind in classes.items() if kind == 'satellite')
        gateways = sorted(name for name, kind in classes.items() if kind == 'gateway')
        for links in replay_link_sets(epochs):
            graph = link_graph(links, metric)
            for destination in satellites + gateways:
                if destination not in graph:
                    continue
                allowed = graph.subgraph([node for node in graph if node in satellites or node == destination])
                if metric == 'hop-count':
                    expected = nx.single_source_shortest_path_length(allowed, destination)
                else:
                    expected = nx.single_source_dijkstra_path_length(allowed, destination, weight='delay_ms')
                routes = next_hops_to(graph, destination, satellites, classes, metric)
                assert set(routes) == {source for source in satellites if source != destination and
                                       source in expected}
                for source, (next_hop, cost) in routes.items():
                    assert cost == pytest.approx(expected[source])
                    assert classes[next_hop] == 'satellite' or next_hop == destination

    def test_routes_leave_links_about_to_break(self, scenarios_dir):
        settings, classes, epochs = smoke_epochs(scenarios_dir)
        assert any(epoch_file.links_del for epoch_file in epochs)
        cfg = OracleConfig.from_settings(settings)
        result = oracle_compute(epochs, classes, cfg, keep_tables=True)
        link_sets = replay_link_sets(epochs)
        times = [(epoch_file.time - epochs[0].time).total_seconds() for epoch_file in epochs]
        for index, table in enumerate(result.tables):
            draining = set()
            for later in range(index + 1, len(epochs)):
                if times[later] - times[index] <= cfg.drain_lead_s:
                    draining |= {link_key(a, b) for a, b in epochs[later].links_del}
            drained = link_graph(link_sets[index], cfg.metric)
            drained.remove_edges_from(key for key in draining if drained.has_edge(*key))
            for source, destinations in table.items():
                for destination in destinations:
                    path = resolve_path(table, source, destination)
                    crossed = [link_key(a, b) for a, b in zip(path, path[1:]) if link_key(a, b) in draining]
                    if not crossed:
                        continue
                    allowed = drained.subgraph([node for node in drained
                                                if classes[node] == 'satellite' or node == destination])
                    assert source not in allowed or not nx.has_path(allowed, source, destination)
