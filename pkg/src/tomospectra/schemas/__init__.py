"""JSON schemas for the machine-readable outputs (CLI and files)."""

import json
from importlib import resources

#: every schema shipped with the package
SCHEMA_NAMES = ("predict", "min_counts", "summary", "rank_report", "ensemble_config")


def load_schema(name):
    """Return the named schema (e.g. ``"predict"``) as a dict."""
    if name not in SCHEMA_NAMES:
        raise KeyError("unknown schema %r; have %s" % (name, SCHEMA_NAMES))
    with resources.files(__package__).joinpath(name + ".json").open("rb") as fh:
        return json.load(fh)
