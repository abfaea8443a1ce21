# SPDX-License-Identifier: Apache-2.0
"""Near-field array signal processing toolkit (Python front end of the C++ core)."""

import io
import json

from . import _core
from ._core import *  # noqa: F401,F403

__version__ = _core.__version__


def run_experiment(config):
    """Run an experiment from a dict or JSON text; returns (rows, aux) as lists of dicts."""
    import csv

    text = config if isinstance(config, str) else json.dumps(config)
    table, aux = _core.run(text)

    def parse(csv_text):
        return list(csv.DictReader(io.StringIO(csv_text)))

    return parse(table), {name: parse(t) for name, t in aux.items()}
