#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import datetime
import json
import os

import pytest

from leo_emulator.lib.errors import CapacityError, ConfigurationError, EpochFormatError, ScenarioInconsistencyError
from leo_emulator.lib.linkmodel import LinkAttributes, PhyModels, link_snapshot
from leo_emulator.lib.orbit import WalkerParams, generate_walker
from leo_emulator.lib.scenario import SAT_CONFIG_FILE, EpochFile, LinkRecord, NodeConfig, QuantizationPolicy, \
    apply_to_link_set, assign_addresses, build_node_configs, diff_snapshots, epoch_file_name, epoch_index, \
    epoch_times, etchosts, generate_scenario, ground_nodes_from_settings, link_key, list_epoch_files, load_epochs, \
    load_sat_config, merge_common_config, read_epoch_file, replay_link_sets, write_scenario
from leo_emulator.lib.settings import Settings

EPOCH_ZERO = datetime.datetime(2023, 10, 1, tzinfo=datetime.timezone.utc)


def smoke_settings(scenarios_dir, duration_s=30.0):
    settings = Settings(path=os.path.join(scenarios_dir, "smoke.json"))
    settings.set_setting('epoch.duration_s', duration_s)
    return settings


class TestLinkKeys(object):

    def test_ground_links_start_at_the_satellite(self):
        assert link_key('grd1', 'sat3') == ('sat3', 'grd1')
        assert link_key('sat3', 'usr2') == ('sat3', 'usr2')

    def test_natural_order(self):
        assert link_key('sat10', 'sat2') == ('sat2', 'sat10')
        assert link_key('usr1', 'grd1') == ('grd1', 'usr1')


class TestNodeConfig(object):

    def test_common_rules_and_node_overrides(self, scenarios_dir):
        sat_config = load_sat_config(os.path.join(scenarios_dir, "sat-config-example.json"))
        nodes, _ = build_node_configs(sat_config)
        assert nodes['sat1'].cpu_request == pytest.approx(0.1)
        assert nodes['sat2'].cpu_request == pytest.approx(0.25)
        assert nodes['sat2'].mem_request == 100 * 1024 * 1024
        assert nodes['grd1'].image == "msvcbench/grd-container:latest"
        assert nodes['usr1'].l3.enable_routing is False

    def test_missing_image(self):
        with pytest.raises(ConfigurationError) as error:
            merge_common_config({"name": "sat1", "type": "satellite"}, [])
        assert error.value.field == 'image'

    def test_unknown_type(self):
        with pytest.raises(ConfigurationError) as error:
            merge_common_config({"name": "r1", "type": "router", "image": "frr"}, [])
        assert error.value.field == 'type'

    def test_to_dict_keeps_extra_keys(self):
        node = NodeConfig.from_dict('grd1', {"type": "gateway", "image": "img", "latitude_deg": 45.0})
        data = node.to_dict()
        assert data['latitude_deg'] == 45.0
        assert data['L3-config'] == {"enable-routing": False, "routing-module": None}


class TestAddresses(object):

    def test_consecutive_slices(self, scenarios_dir):
        sat_config = load_sat_config(os.path.join(scenarios_dir, "sat-config-example.json"))
        nodes, assignments = build_node_configs(sat_config)
        assert assignments['sat1'].cidr_v6 == "2001:db8:100::/126"
        assert assignments['sat1'].loopback_v6 == "2001:db8:100::3"
        assert assignments['sat2'].cidr_v6 == "2001:db8:100::4/126"
        assert assignments['usr1'].cidr_v6 == "2001:db8:300::/126"
        assert assignments['usr1'].cidr_v4 is None
        assert nodes['sat2'].l3.cidr_v6 == "2001:db8:100::4/126"
        assert etchosts(assignments)['grd1'] == "2001:db8:200::3"
        assert etchosts(assignments, version=4) == {}

    def test_super_cidr_capacity(self):
        nodes = [NodeConfig(name, 'satellite', 'img') for name in ('sat1', 'sat2', 'sat3')]
        rules = [{"match-key": "type", "match-value": "satellite", "super-cidr6": "2001:db8::/125"}]
        with pytest.raises(CapacityError):
            assign_addresses(nodes, rules)

    def test_manual_cidr_overlap(self):
        manual = NodeConfig('a', 'satellite', 'img')
        manual.l3.cidr_v6 = "2001:db8::/126"
        automatic = NodeConfig('b', 'satellite', 'img')
        rules = [{"match-key": "type", "match-value": "satellite", "super-cidr6": "2001:db8::/48"}]
        with pytest.raises(ConfigurationError) as error:
            assign_addresses([manual, automatic], rules)
        assert error.value.field == 'cidr'


class TestDiffSnapshots(object):

    def test_sub_quantum_changes_are_silent(self):
        policy = QuantizationPolicy()
        previous = {('sat1', 'sat2'): LinkAttributes(400.0, 3.2)}
        current = {('sat2', 'sat1'): LinkAttributes(400.0, 3.4), ('grd1', 'sat1'): LinkAttributes(50.0, 4.0)}
        epoch = diff_snapshots(previous, current, policy, EPOCH_ZERO)
        assert epoch.links_del == []
        assert epoch.links_update == []
        assert [record.key for record in epoch.links_add] == [('sat1', 'grd1')]

    def test_update_and_delete(self):
        policy = QuantizationPolicy()
        previous = {('sat1', 'sat2'): LinkAttributes(400.0, 3.2), ('sat1', 'grd1'): LinkAttributes(50.0, 4.0)}
        current = {('sat1', 'sat2'): LinkAttributes(400.0, 3.6)}
        epoch = diff_snapshots(previous, current, policy, EPOCH_ZERO)
        assert epoch.links_del == [('sat1', 'grd1')]
        assert epoch.links_update == [LinkRecord('sat1', 'sat2', LinkAttributes(400.0, 4.0))]
        assert apply_to_link_set(policy.apply_all(previous), epoch) == policy.apply_all(current)

    def test_link_in_two_lists(self):
        attributes = LinkAttributes(400.0, 3.0)
        epoch = EpochFile(time=EPOCH_ZERO, links_del=[('sat1', 'sat2')],
                          links_add=[LinkRecord('sat2', 'sat1', attributes)], index=3)
        with pytest.raises(ScenarioInconsistencyError) as error:
            epoch.validate()
        assert error.value.epoch_index == 3

    def test_invalid_policy(self):
        with pytest.raises(ConfigurationError):
            QuantizationPolicy(delay_quantum_ms=0.0)


class TestEpochFiles(object):

    def test_file_names(self):
        assert epoch_file_name(12) == "NetSatBench-epoch12.json"
        assert epoch_index("/tmp/epochs/NetSatBench-epoch12.json") == 12
        assert epoch_index("notes.txt") is None

    def test_numeric_order(self, tmp_path):
        for index in (10, 2, 1):
            (tmp_path / epoch_file_name(index)).write_text("{}")
        paths = list_epoch_files(str(tmp_path), "NetSatBench-epoch*.json")
        assert [epoch_index(path) for path in paths] == [1, 2, 10]

    def test_malformed_file(self, tmp_path):
        path = tmp_path / epoch_file_name(4)
        path.write_text('{\n  "time": "2023-10-01T00:00:00Z",\n  "links-add": [\n')
        with pytest.raises(EpochFormatError) as error:
            read_epoch_file(str(path))
        assert error.value.file_name == "NetSatBench-epoch4.json"
        assert error.value.line is not None

    def test_missing_time(self, tmp_path):
        path = tmp_path / epoch_file_name(0)
        path.write_text(json.dumps({"links-add": []}))
        with pytest.raises(EpochFormatError):
            read_epoch_file(str(path))

    @pytest.mark.parametrize("entries", [
        {"links-add": ["not-a-dict"]},
        {"links-update": [{"endpoint1": "sat1"}]},
        {"links-del": [["sat1", "sat2"]]},
        {"run": ["ping"]},
        {"links-add": [{"endpoint1": "sat1", "endpoint2": "sat2", "rate": "10.0mbit", "delay": "-1.0ms",
                        "loss": "0.0"}]},
    ])
    def test_invalid_entries(self, tmp_path, entries):
        path = tmp_path / epoch_file_name(2)
        path.write_text(json.dumps(dict({"time": "2023-10-01T00:00:10Z"}, **entries)))
        with pytest.raises(EpochFormatError) as error:
            read_epoch_file(str(path))
        assert error.value.file_name == "NetSatBench-epoch2.json"

    def test_epoch_times(self):
        settings = Settings(config={"epoch": {"duration_s": 12.0}})
        assert epoch_times(settings) == [0.0, 5.0, 10.0]


class TestGenerateScenario(object):

    def test_first_epoch_adds_everything(self, scenarios_dir):
        sat_config, epochs = generate_scenario(smoke_settings(scenarios_dir))
        assert len(epochs) == 7
        assert epochs[0].links_del == [] and epochs[0].links_update == []
        assert len([record for record in epochs[0].links_add if record.key[1].startswith('sat')]) == 32 + 24
        assert epochs[1].time - epochs[0].time == datetime.timedelta(seconds=5)
        assert len(sat_config['nodes']) == 32 + 3
        assert sat_config['nodes']['grd1']['type'] == 'gateway'

    def test_replay_matches_snapshot(self, scenarios_dir):
        settings = smoke_settings(scenarios_dir)
        _, epochs = generate_scenario(settings)
        for epoch in epochs:
            epoch.validate()
        replayed = replay_link_sets(epochs)
        state = generate_walker(WalkerParams.from_config(settings.get_setting('constellation')))
        policy = QuantizationPolicy.from_settings(settings)
        for index in (0, 3, 6):
            expected = policy.apply_all(link_snapshot(state, ground_nodes_from_settings(settings), index * 5.0,
                                                      PhyModels(settings.get_setting('phy')), 10.0))
            assert replayed[index] == expected

    def test_written_scenario_reads_back(self, scenarios_dir, tmp_path):
        sat_config, epochs = generate_scenario(smoke_settings(scenarios_dir, duration_s=10.0))
        path = write_scenario(sat_config, epochs, str(tmp_path))
        assert os.path.basename(path) == SAT_CONFIG_FILE
        loaded = load_epochs(str(tmp_path / "epochs"), "NetSatBench-epoch*.json")
        assert [epoch.index for epoch in loaded] == [0, 1, 2]
        assert replay_link_sets(loaded) == replay_link_sets(epochs)
        assert load_sat_config(path) == sat_config

    def test_duplicate_ground_names(self):
        settings = Settings(config={"ground": {"nodes": [
            {"name": "usr1", "kind": "user", "latitude_deg": 0.0, "longitude_deg": 0.0},
            {"name": "usr1", "kind": "user", "latitude_deg": 1.0, "longitude_deg": 0.0},
        ]}})
        with pytest.raises(ConfigurationError):
            ground_nodes_from_settings(settings)
