"""Python access to the shared-control grasping workbench.

All structured values cross the boundary as the same versioned JSON documents
the command line tool reads and writes.
"""

import json

from . import _core
from ._core import FORMAT_VERSION, PROTOCOL, Error, FormatError

__all__ = [
    "FORMAT_VERSION",
    "PROTOCOL",
    "Error",
    "FormatError",
    "Session",
    "config_hash",
    "default_config",
    "describe",
    "generate_scene",
    "learn_demo_model",
    "numpad_velocity",
    "replay_matches",
    "run_experiment",
    "sample_grasps",
]


def _dump(doc):
    if doc is None:
        return ""
    return doc if isinstance(doc, str) else json.dumps(doc)


def _config(config):
    """Configs given as dicts may omit the envelope; it is added here."""
    if isinstance(config, dict) and "format" not in config:
        config = {"format": "sgw.config", "version": FORMAT_VERSION, **config}
    return _dump(config)


def default_config():
    return json.loads(_core.default_config())


def config_hash(config=None):
    return _core.config_hash(_config(config))


def learn_demo_model(config=None):
    return json.loads(_core.learn_demo_model(_config(config)))


def generate_scene(seed, config=None):
    return json.loads(_core.generate_scene(seed, _config(config)))


def sample_grasps(scene, seed, config=None, model=None):
    return json.loads(_core.sample_grasps(_dump(scene), seed, _config(config), _dump(model)))


def run_experiment(config=None, model=None):
    """Returns (summary, records); each record is the text of a trial record file."""
    summary, records = _core.run_experiment(_config(config), _dump(model))
    return json.loads(summary), list(records)


def replay_matches(config, model, record):
    return _core.replay_matches(_config(config), _dump(model), record)


def describe(mode, metric, values):
    return json.loads(_core.describe(mode, metric, list(values)))


def numpad_velocity(keys, speed_limit):
    return _core.numpad_velocity(keys, speed_limit)


class Session:
    """In-process bridge session speaking the wire protocol without a network."""

    def __init__(self, config=None, model=None, seed=1):
        self._s = _core.BridgeSession(_config(config), _dump(model), seed)
        self._seq = 0

    def send(self, type, **fields):
        self._seq += 1
        msg = {"protocol": PROTOCOL, "seq": self._seq, "type": type, **fields}
        return self.send_raw(json.dumps(msg))

    def send_raw(self, text):
        err = self._s.handle(text)
        return None if err is None else json.loads(err)

    def tick(self):
        return json.loads(self._s.tick())

    def frame(self):
        return json.loads(self._s.frame())
