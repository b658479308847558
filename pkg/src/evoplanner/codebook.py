"""Versioned mapping from raw genome field values to operators and parameters."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .exceptions import ConfigError

GENOME_BITS = 64
ENV_VAR = "EVOPLANNER_CODEBOOK"
DEFAULT_PATH = Path(__file__).with_name("data") / "codebook.json"


@dataclass(frozen=True)
class Field:
    """One contiguous genome field.

    Enumerated fields carry ``values``; parameter fields carry ``rows``
    keyed by the value of the field they depend on.
    """

    token: str
    name: str
    offset: int
    width: int
    values: tuple | None = None
    depends_on: str | None = None
    rows: dict | None = None

    @property
    def size(self):
        return 1 << self.width

    @property
    def shift(self):
        return GENOME_BITS - self.offset - self.width

    @property
    def is_param(self):
        return self.depends_on is not None


@dataclass(frozen=True)
class Codebook:
    version: str
    fields: tuple
    sha256: str
    source: str = ""

    def __post_init__(self):
        cursor = 0
        names = {}
        for f in self.fields:
            if f.offset != cursor:
                raise ConfigError(f"field {f.token} starts at {f.offset}, expected {cursor}")
            cursor += f.width
            if f.is_param:
                parent = names.get(f.depends_on)
                if parent is None:
                    raise ConfigError(f"{f.token} depends on unknown field {f.depends_on!r}")
                for key in parent.values:
                    rows = f.rows.get(str(key))
                    if rows is None or len(rows) != f.size:
                        raise ConfigError(f"{f.token} needs {f.size} rows for {key!r}")
            elif len(f.values) != f.size:
                raise ConfigError(f"{f.token} needs {f.size} values, got {len(f.values)}")
            names[f.name] = f
        if cursor != GENOME_BITS:
            raise ConfigError(f"field widths cover {cursor} bits, expected {GENOME_BITS}")

    @property
    def names(self):
        return tuple(f.name for f in self.fields)

    def field(self, name):
        for f in self.fields:
            if f.name == name or f.token == name:
                return f
        raise KeyError(name)

    def param_row(self, name, parent_value, index):
        f = self.field(name)
        return dict(f.rows[str(parent_value)][index])


def parse_codebook(text, source=""):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"codebook is not valid JSON: {exc}") from None
    if doc.get("format") != "evoplanner-codebook":
        raise ConfigError("not an evoplanner codebook")
    fields = []
    for raw in doc["fields"]:
        values = raw.get("values")
        fields.append(
            Field(
                token=raw["token"],
                name=raw["name"],
                offset=int(raw["offset"]),
                width=int(raw["width"]),
                values=None if values is None else tuple(values),
                depends_on=raw.get("depends_on"),
                rows=raw.get("rows"),
            )
        )
    digest = hashlib.sha256(text.encode() if isinstance(text, str) else text).hexdigest()
    return Codebook(str(doc["version"]), tuple(fields), digest, source)


@lru_cache(maxsize=8)
def _load(path):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read codebook {path}: {exc}") from None
    return parse_codebook(text, str(p))


def codebook_path():
    return Path(os.environ.get(ENV_VAR) or DEFAULT_PATH)


def load_codebook(path=None):
    """Load (and cache) a codebook; defaults to ``$EVOPLANNER_CODEBOOK`` or the bundled file."""
    if path is None:
        path = os.environ.get(ENV_VAR) or _DEFAULT_STR
    return _load(str(path))


_DEFAULT_STR = str(DEFAULT_PATH)
