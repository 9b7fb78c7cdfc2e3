#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.cli.py

    Written by:               LEO Emulator contributors
    Date:                     16 Mar 2026, (10:20 AM)

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
import argparse
import json
import logging
import os
import sys

from leo_emulator import harness
from leo_emulator.lib import tools
from leo_emulator.lib.agent import deploy_agents
from leo_emulator.lib.errors import LeoEmulatorError, SelectorError
from leo_emulator.lib.scenario import list_epoch_files, read_epoch_file, write_epoch_file
from leo_emulator.lib.statestore import NODES_PREFIX

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def select_nodes(selector, node_configs):
    """
    Nodes chosen by name or by a key:value match on their configuration

    :param selector:        node name or 'key:value'
    :param node_configs:    dict of node name -> configuration dict
    :return:                matching node names in natural order
    """
    if selector in node_configs:
        return [selector]
    valid_keys = sorted({key for config in node_configs.values() for key in config})
    key, separator, value = selector.partition(':')
    if not separator or key not in valid_keys:
        raise SelectorError(
            "Selector '{}' is neither a node name nor a key:value match on one of: {}".format(
                selector, ', '.join(valid_keys)), valid_keys=valid_keys)
    names = [name for name, config in node_configs.items() if tools.config_matches(config, key, value)]
    if not names:
        logger.warning("Selector '%s' matches no node", selector)
    return sorted(names, key=tools.natural_sort_key)


def _scenario_settings(args):
    settings = harness.load_settings(args.scenario)
    if getattr(args, 'duration', None) is not None:
        settings.set_setting('epoch.duration_s', float(args.duration))
    return settings


def _placement_seed(args):
    return args.seed if args.seed is not None else 1


def _store_node_configs(store):
    return {key[len(NODES_PREFIX):]: value for key, value in store.get_prefix(NODES_PREFIX).items()}


def _epoch_range(text, count):
    if not text:
        return range(count)
    start, _, end = text.partition(':')
    first = int(start) if start else 0
    last = int(end) if end else count - 1
    return range(max(first, 0), min(last, count - 1) + 1)


def cmd_generate(args):
    settings = _scenario_settings(args)
    directory = args.out or settings.base_dir()
    os.makedirs(directory, exist_ok=True)
    _sat_config, epoch_files = harness.generate(settings, directory)
    print("Generated {} epoch files in '{}'".format(len(epoch_files), directory))
    return 0


def cmd_init(args):
    settings = _scenario_settings(args)
    sat_config, epoch_files = harness.prepare_scenario(settings, args.scenario)
    store, nodes, _assignments = harness.init_store(settings, sat_config, epoch_files, seed=_placement_seed(args))
    out = args.out or os.path.join(settings.base_dir(), "store.json")
    with open(out, 'w') as f:
        f.write(store.dumps())
    placed = sum(1 for node in nodes.values() if node.worker)
    print("Loaded {} nodes ({} placed) into '{}'".format(len(nodes), placed, out))
    return 0


def cmd_run(args):
    settings = _scenario_settings(args)
    cfg = harness.ExperimentConfig.from_settings(settings, args.scenario, strategy=args.strategy,
                                                 duration_s=args.duration, seed=args.seed)
    result = harness.run_experiment(cfg, settings=settings)
    harness.write_results(result, args.out)
    print(json.dumps(result.summary, indent=2, sort_keys=True))
    return 0


def cmd_inject(args):
    settings = _scenario_settings(args)
    if not os.path.isdir(args.scenario):
        raise SelectorError("inject needs a generated scenario directory, got '{}'".format(args.scenario))
    sat_config, _epoch_files = harness.prepare_scenario(settings, args.scenario)
    node_configs = {name: dict(config, name=name) for name, config in sat_config.get('nodes', {}).items()}
    targets = select_nodes(args.selector, node_configs)
    epoch_dir = os.path.join(args.scenario, settings.get_setting('epoch.epoch_dir'))
    paths = list_epoch_files(epoch_dir, settings.get_setting('epoch.file_pattern'))
    for index in _epoch_range(args.epochs, len(paths)):
        epoch = read_epoch_file(paths[index])
        for node in targets:
            epoch.add_tasks(node, list(args.task))
        write_epoch_file(epoch, epoch_dir)
    print("Injected {} task(s) for {} node(s)".format(len(args.task), len(targets)))
    return 0


def cmd_exec(args):
    settings = _scenario_settings(args)
    sat_config, epoch_files = harness.prepare_scenario(settings, args.scenario)
    store, _nodes, _assignments = harness.init_store(settings, sat_config, epoch_files, seed=_placement_seed(args))
    targets = select_nodes(args.selector, _store_node_configs(store))
    agents = deploy_agents(store)
    command = ' '.join(args.task)
    for node in targets:
        print("{}: {}".format(node, agents[node].execute(command)))
    agents.stop()
    return 0


def cmd_report(args):
    fmt = args.format
    out = args.output or os.path.join(args.out, "report.{}".format(fmt))
    rows = harness.report(args.out, out, fmt=fmt)
    summary = harness.load_summary(args.out)
    if summary:
        print(json.dumps(summary, indent=2, sort_keys=True))
    print("Wrote {} trace rows to '{}'".format(rows, out))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog='leo-emulator', description='Desk-scale LEO satellite network emulator')
    parser.add_argument('--log-level', default='WARNING',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='Logging level')
    subparsers = parser.add_subparsers(dest='command', required=True, help='Command to execute')

    def scenario_parser(name, help_text, handler):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument('--scenario', required=True,
                         help='Generator config JSON or generated scenario directory')
        sub.add_argument('--seed', type=int, default=None, help='Random seed')
        sub.set_defaults(handler=handler)
        return sub

    generate = scenario_parser('generate', 'Generate epoch files and oracle routes', cmd_generate)
    generate.add_argument('--duration', type=float, default=None, help='Scenario duration in seconds')
    generate.add_argument('--out', default=None, help='Output scenario directory')

    init = scenario_parser('init', 'Load configuration into the state store and place nodes', cmd_init)
    init.add_argument('--out', default=None, help='State store dump file')

    run = scenario_parser('run', 'Replay epochs and run the probe experiment', cmd_run)
    run.add_argument('--strategy', default=None, help='local-min-delay, e2e:<ids> or a named strategy')
    run.add_argument('--duration', type=float, default=None, help='Experiment duration in seconds')
    run.add_argument('--out', default='results', help='Results directory')

    inject = scenario_parser('inject', 'Append tasks to epoch files', cmd_inject)
    inject.add_argument('--selector', required=True, help='Node name or key:value match')
    inject.add_argument('--epochs', default=None, help='Epoch index range START:END (inclusive)')
    inject.add_argument('task', nargs='+', help='Command to append')

    execute = scenario_parser('exec', 'Run a task on selected nodes', cmd_exec)
    execute.add_argument('--selector', required=True, help='Node name or key:value match')
    execute.add_argument('task', nargs='+', help='Command to run')

    report = subparsers.add_parser('report', help='Export the traces of a run')
    report.add_argument('--out', default='results', help='Results directory of the run')
    report.add_argument('--format', default='csv', choices=['csv', 'jsonl'])
    report.add_argument('--output', default=None, help='Report file')
    report.set_defaults(handler=cmd_report)
    return parser


def cli(argv=None):
    """
    Command line entry point

    :param argv:
    :return: exit status
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    try:
        return args.handler(args)
    except LeoEmulatorError as e:
        logger.error("%s", e)
        print("error: {}".format(e), file=sys.stderr)
        return 2


def main():
    sys.exit(cli())
