#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import csv
import json
import os

import numpy as np
import pytest

from leo_emulator.harness import SCENARIO_SETTINGS_FILE, TRACE_FIELDS, ExperimentConfig, Experiment, \
    closest_gateway_sessions, generate, hold, init_store, load_settings, load_summary, prepare_scenario, report, \
    run_experiment, simulate_probe, write_results
from leo_emulator.lib.errors import ConfigurationError
from leo_emulator.lib.linkmodel import LinkAttributes, grid_plus_isls
from leo_emulator.lib.orbit import GroundNode, WalkerParams
from leo_emulator.lib.scenario import ground_nodes_from_settings
from leo_emulator.lib.settings import Settings
from leo_emulator.lib.srv6 import NetworkView, Session, SessionState, forward_sid_list, reverse_sid_list
from leo_emulator.lib.statestore import DiscreteMode, run_epochs

EVENT_KINDS = {'register', 'reregister', 'ho-command', 'ho-complete', 'ho-cancel'}


def bent_pipe_view():
    view = NetworkView([GroundNode('usr1', 'user', 45.0, 9.0), GroundNode('grd1', 'gateway', 45.5, 9.2)])
    view.update({
        ('sat1', 'usr1'): LinkAttributes(50.0, 6.0),
        ('sat1', 'grd1'): LinkAttributes(200.0, 6.0),
    })
    return view


def bent_pipe_session():
    return Session(user='usr1', gateway='grd1', uss='sat1', gss='sat1',
                   forward_sids=forward_sid_list('sat1', 'sat1', 'usr1'),
                   reverse_sids=reverse_sid_list('sat1', 'sat1', 'grd1'), state=SessionState.ACTIVE)


def smoke_experiment(scenarios_dir, duration_s=60.0, seed=None):
    scenario = os.path.join(scenarios_dir, "smoke.json")
    settings = load_settings(scenario)
    cfg = ExperimentConfig.from_settings(settings, scenario, duration_s=duration_s, seed=seed)
    return cfg, settings


class TestHoldQueue(object):

    def test_release_times(self):
        released = hold(np.array([0.0, 0.04, 0.05, 0.12, 0.2]), [(0.04, 0.12)])
        assert released.tolist() == [0.0, 0.12, 0.12, 0.12, 0.2]

    def test_chained_windows(self):
        released = hold(np.array([0.01]), [(0.0, 0.05), (0.05, 0.1)])
        assert released.tolist() == [0.1]

    def test_input_is_not_modified(self):
        times = np.array([0.05])
        hold(times, [(0.0, 0.1)])
        assert times.tolist() == [0.05]


class TestSimulateProbe(object):

    def test_bent_pipe_round_trip(self):
        assert simulate_probe(bent_pipe_session(), 1.0, bent_pipe_view()) == pytest.approx(24.0)

    def test_held_probe_waits(self):
        rtt = simulate_probe(bent_pipe_session(), 0.01, bent_pipe_view(), uplink_pauses=[(0.0, 0.08)])
        assert rtt == pytest.approx(70.0 + 24.0)

    def test_broken_tunnel_loses_the_probe(self):
        view = bent_pipe_view()
        view.update({('sat1', 'grd1'): LinkAttributes(200.0, 6.0)})
        assert simulate_probe(bent_pipe_session(), 1.0, view) is None

    def test_link_loss(self):
        view = bent_pipe_view()
        view.update({
            ('sat1', 'usr1'): LinkAttributes(50.0, 6.0, 1.0),
            ('sat1', 'grd1'): LinkAttributes(200.0, 6.0),
        })
        assert simulate_probe(bent_pipe_session(), 1.0, view, rng=np.random.default_rng(1)) is None
        assert simulate_probe(bent_pipe_session(), 1.0, view) == pytest.approx(24.0)

    def test_inactive_session(self):
        session = bent_pipe_session()
        session.state = SessionState.REGISTERING
        assert simulate_probe(session, 1.0, bent_pipe_view()) is None


class TestSessions(object):

    def test_closest_gateway(self, scenarios_dir):
        ground = ground_nodes_from_settings(Settings(path=os.path.join(scenarios_dir, "oneweb-europe.json")))
        sessions = dict(closest_gateway_sessions(ground))
        assert sessions == {
            'usr1': 'grd1',
            'usr2': 'grd2',
            'usr3': 'grd3',
            'usr4': 'grd4',
            'usr5': 'grd5',
            'usr6': 'grd3',
            'usr7': 'grd5',
        }

    def test_pinned_sessions(self, scenarios_dir):
        ground = ground_nodes_from_settings(Settings(path=os.path.join(scenarios_dir, "oneweb-europe.json")))
        assert ('usr7', 'grd1') in closest_gateway_sessions(ground, [('usr7', 'grd1')])
        with pytest.raises(ConfigurationError):
            closest_gateway_sessions(ground, [('usr7', 'usr1')])

    def test_experiment_config(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig(scenario='x', probe_period_ms=0.0)
        cfg = ExperimentConfig.from_settings(Settings(), 'x', strategy='local-min-delay', seed=5)
        assert cfg.handover.strategy == 'local-min-delay'
        assert cfg.seed == 5


class TestScenarioFiles(object):

    def test_generated_directory_reads_back(self, scenarios_dir, tmp_path):
        settings = Settings(path=os.path.join(scenarios_dir, "smoke.json"))
        settings.set_setting('epoch.duration_s', 10.0)
        _sat_config, epochs = generate(settings, str(tmp_path))
        assert (tmp_path / SCENARIO_SETTINGS_FILE).exists()
        loaded_settings = load_settings(str(tmp_path))
        assert loaded_settings.get_setting('epoch.duration_s') == 10.0
        sat_config, loaded = prepare_scenario(loaded_settings, str(tmp_path))
        assert len(loaded) == len(epochs) == 3
        assert sorted(loaded[0].run) == sorted(epochs[0].run)
        assert len(sat_config['nodes']) == 35

    def test_time_scale_does_not_change_the_store(self, scenarios_dir, tmp_path):
        settings = Settings(path=os.path.join(scenarios_dir, "smoke.json"))
        settings.set_setting('epoch.duration_s', 30.0)
        sat_config, epochs = generate(settings, str(tmp_path))
        epoch_dir = str(tmp_path / sat_config['epoch-config']['epoch-dir'])
        dumps = {}
        sleeps = {}
        for time_scale in (0, 1):
            store, _nodes, _assignments = init_store(settings, sat_config, epochs)
            sleeps[time_scale] = []
            run_epochs(store, DiscreteMode(epoch_dir=epoch_dir, time_scale=time_scale),
                       sleep=sleeps[time_scale].append)
            dumps[time_scale] = store.dumps()
        assert sleeps[0] == []
        assert sleeps[1] == [5.0] * (len(epochs) - 1)
        assert dumps[0] == dumps[1]

    def test_empty_directory(self, tmp_path):
        with pytest.raises(ConfigurationError):
            prepare_scenario(Settings(), str(tmp_path))


class TestExperiment(object):

    def test_smoke_run(self, scenarios_dir):
        cfg, settings = smoke_experiment(scenarios_dir)
        result = run_experiment(cfg, settings=settings)
        assert set(result.traces) == {'usr1', 'usr2'}
        for user, trace in result.traces.items():
            assert len(trace) == 6000
            assert trace.gateway == 'grd1'
            assert np.all(trace.received() > 0)
            assert result.summary['users'][user]['probes'] == 6000
        assert {event['event'] for event in result.events} <= EVENT_KINDS
        assert result.summary['strategy'] == 'e2e:1,2,4'
        assert result.summary['seed'] == 7
        assert result.summary['duration_s'] == 60.0

    def test_runs_are_reproducible(self, scenarios_dir, tmp_path):
        first_cfg, first_settings = smoke_experiment(scenarios_dir, duration_s=30.0, seed=3)
        second_cfg, second_settings = smoke_experiment(scenarios_dir, duration_s=30.0, seed=3)
        first = write_results(run_experiment(first_cfg, settings=first_settings), str(tmp_path / "a"))
        second = write_results(run_experiment(second_cfg, settings=second_settings), str(tmp_path / "b"))
        for name in ('traces', 'handovers', 'summary'):
            with open(first[name]) as f_a, open(second[name]) as f_b:
                assert f_a.read() == f_b.read()

    def test_duration_must_align_with_epochs(self, scenarios_dir):
        cfg, settings = smoke_experiment(scenarios_dir, duration_s=7.0)
        with pytest.raises(ConfigurationError):
            run_experiment(cfg, settings=settings)

    def test_duration_within_the_scenario(self, scenarios_dir, tmp_path):
        settings = Settings(path=os.path.join(scenarios_dir, "smoke.json"))
        settings.set_setting('epoch.duration_s', 10.0)
        sat_config, epochs = generate(settings, str(tmp_path))
        cfg = ExperimentConfig.from_settings(settings, str(tmp_path), duration_s=20.0)
        with pytest.raises(ConfigurationError):
            Experiment(cfg, settings=settings).run(sat_config, epochs)


class TestReports(object):

    def test_results_and_report(self, scenarios_dir, tmp_path):
        cfg, settings = smoke_experiment(scenarios_dir, duration_s=10.0)
        paths = write_results(run_experiment(cfg, settings=settings), str(tmp_path / "run"))
        with open(paths['traces'], newline='') as f:
            rows = list(csv.reader(f))
        assert rows[0] == TRACE_FIELDS
        assert len(rows) == 1 + 2 * 1000
        assert load_summary(str(tmp_path / "run"))['users']['usr1']['probes'] == 1000

        assert report(str(tmp_path / "run"), str(tmp_path / "out.csv")) == 2000
        assert report(str(tmp_path / "run"), str(tmp_path / "out.jsonl"), fmt='jsonl') == 2000
        with open(tmp_path / "out.jsonl") as f:
            first = json.loads(f.readline())
        assert sorted(first) == sorted(TRACE_FIELDS)

    def test_empty_run_exports_a_header(self, tmp_path):
        out = tmp_path / "out.csv"
        assert report(str(tmp_path), str(out)) == 0
        assert out.read_text() == ",".join(TRACE_FIELDS) + "\n"
        assert load_summary(str(tmp_path)) == {}

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ConfigurationError):
            report(str(tmp_path), str(tmp_path / "out.xml"), fmt='xml')


def evaluation_run(scenarios_dir, strategy, duration_s, seed=None):
    scenario = os.path.join(scenarios_dir, "oneweb-europe.json")
    settings = load_settings(scenario)
    cfg = ExperimentConfig.from_settings(settings, scenario, strategy=strategy, duration_s=duration_s, seed=seed)
    return run_experiment(cfg, settings)


def handover_windows(events, session, margin_s=1.0):
    windows = []
    start = None
    for event in sorted((event for event in events if event['session'] == session), key=lambda e: e['t']):
        if event['event'] == 'ho-command':
            start = event['t']
        elif event['event'] in ('ho-complete', 'ho-cancel') and start is not None:
            windows.append((start - margin_s, event['t'] + margin_s))
            start = None
    if start is not None:
        windows.append((start - margin_s, float('inf')))
    return windows


def in_handover(send_t, windows):
    inside = np.zeros(len(send_t), dtype=bool)
    for start, end in windows:
        inside |= (send_t >= start) & (send_t <= end)
    return inside


@pytest.mark.acceptance
class TestEvaluationScenario(object):

    def test_isl_count(self):
        assert len(grid_plus_isls(WalkerParams(altitude_km=1200.0, inclination_deg=87.9, num_planes=12,
                                               sats_per_plane=49))) == 1127

    def test_every_user_registers(self, scenarios_dir):
        scenario = os.path.join(scenarios_dir, "oneweb-europe.json")
        settings = load_settings(scenario)
        result = run_experiment(ExperimentConfig.from_settings(settings, scenario, duration_s=60.0), settings)
        registered = {event['session'] for event in result.events if event['event'] == 'register'}
        assert len(registered) == 7
        for user, stats in result.summary['users'].items():
            assert stats['probes'] == 6000
            assert stats['rtt_ms']['p50'] is not None

    def test_seam_split_under_local_selection(self, scenarios_dir):
        result = evaluation_run(scenarios_dir, 'local-min-delay', 600.0)
        trace = result.traces['usr7']
        split = (trace.hops >= 10) & ~trace.lost
        assert np.count_nonzero(split) > 0
        assert np.median(trace.rtt_ms[split]) > 100.0

    def test_end_to_end_selection_avoids_the_seam(self, scenarios_dir):
        result = evaluation_run(scenarios_dir, 'e2e:1,2,4', 600.0)
        trace = result.traces['usr7']
        steady = ~trace.lost & ~in_handover(trace.send_t, handover_windows(result.events, 'usr7-grd5'))
        assert np.count_nonzero(steady) > 0
        assert np.all(trace.rtt_ms[steady] <= 45.0)

    def test_same_seed_gives_identical_traces(self, scenarios_dir, tmp_path):
        paths = [write_results(evaluation_run(scenarios_dir, 'local-min-delay', 300.0, seed=11), str(tmp_path / run))
                 for run in ("a", "b")]
        with open(paths[0]['traces'], 'rb') as f_a, open(paths[1]['traces'], 'rb') as f_b:
            assert f_a.read() == f_b.read()

    def test_lifetime_filter_cuts_handovers(self, scenarios_dir):
        by_lifetime = evaluation_run(scenarios_dir, 'e2e:1,2,3', 1800.0).summary['users']
        by_delay = evaluation_run(scenarios_dir, 'e2e:1,2,4', 1800.0).summary['users']
        assert sorted(by_lifetime) == sorted(by_delay)
        for user in by_delay:
            assert by_lifetime[user]['handovers'] <= 0.7 * by_delay[user]['handovers']
