#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.statestore.py

    Written by:               LEO Emulator contributors
    Date:                     06 Mar 2026, (9:05 AM)

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
"""
Notes:
    - Key space:
        /config/workers/<worker>            worker configuration
        /config/nodes/<node>                merged node configuration
        /config/etchosts6/<node>            loopback address (etchosts4 for IPv4)
        /config/epoch-config                epoch settings plus the current epoch time and file
        /config/links/<node>/vl_<peer>      link record, written under both endpoints
        /config/run/<node>                  task list of the current epoch
"""
import copy
import dataclasses
import json
import logging
import os
import queue
import threading
import time
from typing import Any, NamedTuple

from leo_emulator.lib import tools
from leo_emulator.lib.errors import ScenarioInconsistencyError
from leo_emulator.lib.linkmodel import LinkAttributes
from leo_emulator.lib.scenario import list_epoch_files, link_key, read_epoch_file

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")

WORKERS_PREFIX = "/config/workers/"
NODES_PREFIX = "/config/nodes/"
LINKS_PREFIX = "/config/links/"
RUN_PREFIX = "/config/run/"
EPOCH_CONFIG_KEY = "/config/epoch-config"
LINK_NAME_PREFIX = "vl_"


def node_key(name):
    return NODES_PREFIX + name


def worker_key(name):
    return WORKERS_PREFIX + name


def etchosts_key(name, version=6):
    return "/config/etchosts{}/{}".format(version, name)


def link_prefix(node):
    return "{}{}/".format(LINKS_PREFIX, node)


def link_store_key(node, peer):
    return "{}{}{}".format(link_prefix(node), LINK_NAME_PREFIX, peer)


def run_key(node):
    return RUN_PREFIX + node


def split_link_store_key(key):
    """
    (node, peer) of a '/config/links/<node>/vl_<peer>' key, or None

    :param key:
    :return:
    """
    if not key.startswith(LINKS_PREFIX):
        return None
    parts = key[len(LINKS_PREFIX):].split('/')
    if len(parts) != 2 or not parts[1].startswith(LINK_NAME_PREFIX):
        return None
    return parts[0], parts[1][len(LINK_NAME_PREFIX):]


class WatchEvent(NamedTuple):
    key: str
    old: Any
    new: Any
    revision: int

    @property
    def is_delete(self):
        return self.new is None


class Watcher(object):
    """
    Subscription to every mutation under a key prefix.

    With a callback, events are delivered synchronously from the writing thread.
    Without one, they are queued for the consumer to fetch with get() or drain().
    """

    def __init__(self, store, prefix, callback=None):
        self.store = store
        self.prefix = prefix
        self.callback = callback
        self.events = queue.Queue()

    def matches(self, key):
        return key.startswith(self.prefix)

    def notify(self, event):
        if self.callback is not None:
            self.callback(event)
        else:
            self.events.put(event)

    def get(self, timeout=None):
        return self.events.get(timeout=timeout)

    def drain(self):
        events = []
        while True:
            try:
                events.append(self.events.get_nowait())
            except queue.Empty:
                return events

    def cancel(self):
        self.store.unwatch(self)


class KeyValueStore(object):
    """
    In-process watchable key-value store holding the whole emulation state.
    Mutations are serialised by a single lock and every mutation bumps the revision.
    """

    def __init__(self):
        self._data = {}
        self._revision = 0
        self._watchers = []
        self._lock = threading.RLock()

    @property
    def revision(self):
        return self._revision

    def put(self, key, value):
        if not key.startswith('/'):
            raise ValueError("Store keys are '/' separated paths, got '{}'".format(key))
        with self._lock:
            old = self._data.get(key)
            value = copy.deepcopy(value)
            self._data[key] = value
            self._revision += 1
            self.__dispatch(WatchEvent(key, old, copy.deepcopy(value), self._revision))
            return self._revision

    def get(self, key, default=None):
        with self._lock:
            if key not in self._data:
                return default
            return copy.deepcopy(self._data[key])

    def delete(self, key):
        with self._lock:
            if key not in self._data:
                return False
            old = self._data.pop(key)
            self._revision += 1
            self.__dispatch(WatchEvent(key, old, None, self._revision))
            return True

    def get_prefix(self, prefix):
        with self._lock:
            return {key: copy.deepcopy(value) for key, value in sorted(self._data.items()) if key.startswith(prefix)}

    def delete_prefix(self, prefix):
        with self._lock:
            keys = [key for key in sorted(self._data) if key.startswith(prefix)]
            for key in keys:
                self.delete(key)
            return len(keys)

    def watch_prefix(self, prefix, callback=None):
        watcher = Watcher(self, prefix, callback=callback)
        with self._lock:
            self._watchers.append(watcher)
        return watcher

    def unwatch(self, watcher):
        with self._lock:
            if watcher in self._watchers:
                self._watchers.remove(watcher)

    def __dispatch(self, event):
        for watcher in list(self._watchers):
            if watcher.matches(event.key):
                watcher.notify(event)

    def dump(self):
        with self._lock:
            return {key: copy.deepcopy(self._data[key]) for key in sorted(self._data)}

    def dumps(self):
        return json.dumps(self.dump(), sort_keys=True, indent=1)

    def load(self, data):
        for key in sorted(data):
            self.put(key, data[key])

    def node_names(self):
        return sorted((key[len(NODES_PREFIX):] for key in self.get_prefix(NODES_PREFIX)), key=tools.natural_sort_key)

    def link_set(self):
        """
        Link set held under /config/links/, one entry per bidirectional pair

        :return: dict of link key -> LinkAttributes
        """
        links = {}
        for key, value in self.get_prefix(LINKS_PREFIX).items():
            endpoints = split_link_store_key(key)
            if endpoints is None:
                continue
            pair = link_key(*endpoints)
            if pair not in links:
                links[pair] = LinkAttributes.from_record(value)
        return links


def load_static_config(store, nodes, assignments=None, workers=None, epoch_config=None):
    """
    Write workers, merged node configurations, host mappings and the epoch configuration into the store

    :param store:
    :param nodes:       dict of name -> NodeConfig
    :param assignments: dict of name -> AddressAssignment
    :param workers:     list of worker dicts with a 'name' key
    :param epoch_config:
    :return:
    """
    for worker in workers or []:
        worker = dict(worker)
        store.put(worker_key(worker.pop('name')), worker)
    for name in sorted(nodes, key=tools.natural_sort_key):
        store.put(node_key(name), nodes[name].to_dict())
    for name, assignment in sorted((assignments or {}).items()):
        if assignment.loopback_v6:
            store.put(etchosts_key(name, 6), assignment.loopback_v6)
        if assignment.loopback_v4:
            store.put(etchosts_key(name, 4), assignment.loopback_v4)
    if epoch_config is not None:
        store.put(EPOCH_CONFIG_KEY, dict(epoch_config))
    logger.info("Loaded %s nodes and %s workers into the state store", len(nodes), len(workers or []))


@dataclasses.dataclass
class EpochSummary:
    file_name: str = None
    added: int = 0
    updated: int = 0
    deleted: int = 0
    unchanged: int = 0
    tasks: int = 0
    rejected: list = dataclasses.field(default_factory=list)

    @property
    def link_mutations(self):
        return self.added + self.updated + self.deleted

    def reject(self, entry, reason):
        logger.warning("Rejected epoch entry %s in '%s': %s", entry, self.file_name, reason)
        self.rejected.append({"entry": entry, "reason": reason})


def apply_epoch(store, epoch, file_name=None):
    """
    Apply one epoch file to the store.

    Link entries are written under both endpoints. Unchanged link values are not rewritten.
    Entries naming unknown nodes are rejected and recorded, the rest of the file is still applied.

    :param store:
    :param epoch:       EpochFile
    :param file_name:
    :return:            EpochSummary
    """
    summary = EpochSummary(file_name=file_name or epoch.file_name)
    known_nodes = set(store.node_names())

    def unknown(*names):
        return [name for name in names if name not in known_nodes]

    for a, b in epoch.links_del:
        missing = unknown(a, b)
        if missing:
            summary.reject({"endpoint1": a, "endpoint2": b}, "unknown node {}".format(', '.join(missing)))
            continue
        removed = store.delete(link_store_key(a, b))
        removed = store.delete(link_store_key(b, a)) or removed
        if removed:
            summary.deleted += 1
        else:
            summary.unchanged += 1

    for record in list(epoch.links_update) + list(epoch.links_add):
        value = record.to_dict()
        missing = unknown(record.endpoint1, record.endpoint2)
        if missing:
            summary.reject(value, "unknown node {}".format(', '.join(missing)))
            continue
        existed = False
        changed = False
        for node, peer in ((record.endpoint1, record.endpoint2), (record.endpoint2, record.endpoint1)):
            key = link_store_key(node, peer)
            current = store.get(key)
            existed = existed or current is not None
            if current != value:
                store.put(key, value)
                changed = True
        if not changed:
            summary.unchanged += 1
        elif existed:
            summary.updated += 1
        else:
            summary.added += 1

    for node, commands in epoch.run.items():
        if unknown(node):
            summary.reject({"run": node}, "unknown node {}".format(node))
            continue
        # Task lists are always rewritten so agents run them again
        store.put(run_key(node), list(commands))
        summary.tasks += len(commands)

    epoch_config = store.get(EPOCH_CONFIG_KEY, {})
    epoch_config['epoch-time'] = tools.format_timestamp(epoch.time)
    epoch_config['epoch-file'] = summary.file_name
    store.put(EPOCH_CONFIG_KEY, epoch_config)

    logger.debug("Applied epoch '%s': %s added, %s updated, %s deleted, %s tasks, %s rejected", summary.file_name,
                 summary.added, summary.updated, summary.deleted, summary.tasks, len(summary.rejected))
    return summary


@dataclasses.dataclass(frozen=True)
class DiscreteMode:
    epoch_dir: str
    file_pattern: str = "NetSatBench-epoch*.json"
    # 0 applies files as fast as possible
    time_scale: float = 1.0


@dataclasses.dataclass(frozen=True)
class RealTimeMode:
    queue: Any = None
    folder: str = None
    file_pattern: str = "*.json"
    poll_interval_s: float = 1.0


class EpochRunner(object):
    """
    Applies epoch files to a store and keeps the simulated clock.
    """

    def __init__(self, store, time_scale=1.0, sleep=time.sleep, on_epoch=None):
        if time_scale < 0:
            raise ValueError("time_scale must be >= 0, got {}".format(time_scale))
        self.store = store
        self.time_scale = time_scale
        self.sleep = sleep
        self.on_epoch = on_epoch
        self.clock = None
        self.summaries = []

    def apply(self, epoch, file_name=None):
        if self.clock is not None and epoch.time <= self.clock:
            raise ScenarioInconsistencyError(
                "Epoch time {} does not follow {}".format(tools.format_timestamp(epoch.time),
                                                          tools.format_timestamp(self.clock)),
                epoch_index=epoch.index)
        summary = apply_epoch(self.store, epoch, file_name=file_name)
        self.clock = epoch.time
        self.summaries.append(summary)
        if self.on_epoch is not None:
            self.on_epoch(epoch, summary)
        return summary

    def __wait_until(self, epoch):
        if self.clock is None or self.time_scale == 0:
            return
        delay = (epoch.time - self.clock).total_seconds() * self.time_scale
        if delay > 0:
            self.sleep(delay)

    def run_files(self, epoch_files):
        """
        Apply in-memory epoch files in order, preserving their timing

        :param epoch_files:
        :return:
        """
        for epoch in epoch_files:
            self.__wait_until(epoch)
            self.apply(epoch)
        return self.summaries

    def run_discrete(self, epoch_dir, file_pattern):
        paths = list_epoch_files(epoch_dir, file_pattern)
        logger.info("Replaying %s epoch files from '%s'", len(paths), epoch_dir)
        for path in paths:
            epoch = read_epoch_file(path)
            self.__wait_until(epoch)
            self.apply(epoch, file_name=os.path.basename(path))
        return self.summaries

    def run_queue(self, epoch_queue):
        """
        Apply epoch files as they arrive on a queue until a None sentinel

        :param epoch_queue:
        :return:
        """
        while True:
            item = epoch_queue.get()
            if item is None:
                break
            if isinstance(item, str):
                self.apply(read_epoch_file(item), file_name=os.path.basename(item))
            else:
                self.apply(item)
        return self.summaries

    def drain_folder(self, folder, file_pattern="*.json"):
        """
        Apply and remove every file currently in an epoch-queue folder, in index order

        :param folder:
        :param file_pattern:
        :return: number of files applied
        """
        paths = list_epoch_files(folder, file_pattern)
        for path in paths:
            self.apply(read_epoch_file(path), file_name=os.path.basename(path))
            os.remove(path)
        return len(paths)

    def watch_folder(self, folder, file_pattern="*.json", poll_interval_s=1.0, stop_event=None):
        stop_event = stop_event or threading.Event()
        logger.info("Watching epoch-queue folder '%s'", folder)
        while not stop_event.is_set():
            self.drain_folder(folder, file_pattern)
            stop_event.wait(poll_interval_s)
        # Files that arrived just before the stop request
        self.drain_folder(folder, file_pattern)
        return self.summaries


def run_epochs(store, mode, sleep=time.sleep, on_epoch=None, stop_event=None):
    """
    Apply epoch files to the store in discrete-time or real-time mode

    :param store:
    :param mode:        DiscreteMode or RealTimeMode
    :param sleep:
    :param on_epoch:    callback(epoch, summary) after each file
    :param stop_event:  ends real-time folder polling
    :return:            the EpochRunner, holding the clock and per-file summaries
    """
    if isinstance(mode, DiscreteMode):
        runner = EpochRunner(store, time_scale=mode.time_scale, sleep=sleep, on_epoch=on_epoch)
        runner.run_discrete(mode.epoch_dir, mode.file_pattern)
    elif isinstance(mode, RealTimeMode):
        runner = EpochRunner(store, time_scale=0, sleep=sleep, on_epoch=on_epoch)
        if mode.queue is not None:
            runner.run_queue(mode.queue)
        if mode.folder is not None:
            runner.watch_folder(mode.folder, mode.file_pattern, mode.poll_interval_s, stop_event=stop_event)
    else:
        raise TypeError("Unknown epoch run mode {!r}".format(mode))
    return runner
