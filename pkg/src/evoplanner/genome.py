"""64-bit planner genomes and their decoded configurations.

Bit 0 is the most significant bit and belongs to the first field. Fields
are contiguous, so a single bit flip changes at most one token.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .codebook import GENOME_BITS, load_codebook
from .exceptions import ConfigError, EncodingError, InvalidSpecError

MASK64 = (1 << GENOME_BITS) - 1


class PlannerConfig(NamedTuple):
    """Decoded planner assembly.

    Enumerated tokens hold their concrete value; ``*_param`` tokens hold the
    row index into the codebook table of the operator they parameterize.
    """

    n_control_points: int = 6
    n_populations: int = 1
    individuals_per_pop: int = 16
    division: str = "single"
    smoother: str = "Bezier"
    sort_strategy: str = "Penalty"
    sort_param: int = 0
    elitism: float = 0.0
    rank_scheme: str = "Linear"
    selection: str = "Tournament"
    selection_param: int = 0
    exploit: str = "nPX"
    exploit_param: int = 0
    twins: bool = False
    explore: str = "UM"
    explore_param: int = 0
    keep_inferior: bool = False
    end_mode: str = "generations"
    end_param: int = 0
    case1: str = "none"
    case1_param: int = 0
    case2: str = "none"
    case2_param: int = 0
    restart: bool = False
    cellular: bool = False
    injection: float = 0.0
    repair: int = 0
    migration: int = 0
    antibody: float = 0.0
    forbid_clones: bool = False
    decay: float | None = None
    pfih: int = 0

    def params(self, name, codebook=None):
        """Concrete parameter row for a ``*_param`` token."""
        cb = codebook or load_codebook()
        f = cb.field(name)
        return cb.param_row(name, getattr(self, f.depends_on), getattr(self, name))

    @property
    def sort_params(self):
        return self.params("sort_param")

    @property
    def selection_params(self):
        return self.params("selection_param")

    @property
    def exploit_params(self):
        return self.params("exploit_param")

    @property
    def explore_params(self):
        return self.params("explore_param")

    @property
    def end_limit(self):
        return self.params("end_param")["limit"]

    @property
    def case1_value(self):
        return self.params("case1_param").get("value", 0.0)

    @property
    def case2_tolerance(self):
        return self.params("case2_param").get("tolerance", 0.0)

    @property
    def total_individuals(self):
        return self.n_populations * self.individuals_per_pop


@dataclass(frozen=True, order=True)
class PlannerGenome:
    """Immutable 64-bit genome stored as an unsigned integer."""

    value: int

    def __post_init__(self):
        v = self.value
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
            raise InvalidSpecError("genome value must be an integer")
        if not 0 <= int(v) <= MASK64:
            raise InvalidSpecError("genome value must fit in 64 bits")
        object.__setattr__(self, "value", int(v))

    @classmethod
    def from_string(cls, text):
        text = str(text).strip()
        if len(text) != GENOME_BITS or set(text) - {"0", "1"}:
            raise InvalidSpecError("a genome literal is exactly 64 characters of 0/1")
        return cls(int(text, 2))

    @classmethod
    def from_bits(cls, bits):
        bits = list(bits)
        if len(bits) != GENOME_BITS or any(b not in (0, 1) for b in bits):
            raise InvalidSpecError("a genome is exactly 64 bits of 0/1")
        return cls(int("".join(str(int(b)) for b in bits), 2))

    @property
    def bits(self):
        return tuple(int(c) for c in str(self))

    def __str__(self):
        return format(self.value, "064b")

    def __len__(self):
        return GENOME_BITS


def _coerce(g):
    if isinstance(g, PlannerGenome):
        return g
    if isinstance(g, str):
        return PlannerGenome.from_string(g)
    if isinstance(g, (int, np.integer)) and not isinstance(g, bool):
        return PlannerGenome(int(g))
    return PlannerGenome.from_bits(g)


_TABLE_CACHE = {}


def _allowed_types(vals):
    kinds = {type(v) for v in vals}
    if kinds & {int, float} and bool not in kinds:
        kinds |= {int, float, np.integer, np.floating}
    return frozenset(kinds)


def _decoder(codebook):
    """Per-field shifts, masks, value tables and reverse lookups, cached by hash."""
    key = codebook.sha256
    if key not in _TABLE_CACHE:
        if codebook.names != PlannerConfig._fields:
            raise ConfigError("codebook fields do not match the planner configuration")
        fields = []
        for f in codebook.fields:
            vals = None if f.is_param else f.values
            lookup = None if vals is None else {v: i << f.shift for i, v in enumerate(vals)}
            types = frozenset({int, np.integer}) if vals is None else _allowed_types(vals)
            fields.append((f.name, f.shift, f.size - 1, vals, lookup, types))
        _TABLE_CACHE[key] = tuple(fields)
    return _TABLE_CACHE[key]


def decode(g, codebook=None):
    """Total decoder: every 64-bit value yields a :class:`PlannerConfig`."""
    value = g.value if type(g) is PlannerGenome else _coerce(g).value
    fields = _decoder(codebook or load_codebook())
    return PlannerConfig._make(
        [
            (value >> s) & m if vals is None else vals[(value >> s) & m]
            for _, s, m, vals, _, _ in fields
        ]
    )


def encode(config, codebook=None):
    """Inverse of :func:`decode`; raises :class:`EncodingError` on unknown values."""
    fields = _decoder(codebook or load_codebook())
    if len(config) != len(fields):
        raise EncodingError("configuration has the wrong number of fields")
    value = 0
    for item, (name, shift, mask, _, lookup, types) in zip(config, fields):
        if type(item) not in types and (type(item) is bool or not isinstance(item, tuple(types))):
            raise EncodingError(f"{name} value {item!r} has the wrong type")
        if lookup is None:
            if not 0 <= item <= mask:
                raise EncodingError(f"{name} index {item!r} outside 0..{mask}")
            value |= int(item) << shift
        else:
            bits = lookup.get(item)
            if bits is None:
                raise EncodingError(f"{name} value {item!r} is not in the codebook")
            value |= bits
    genome = object.__new__(PlannerGenome)
    object.__setattr__(genome, "value", value)
    return genome


def field_values(g, codebook=None):
    """Raw integer value of every field, in layout order."""
    value = _coerce(g).value
    return tuple((value >> s) & m for _, s, m, _, _, _ in _decoder(codebook or load_codebook()))


# -- variation ----------------------------------------------------------


def random_genome(rng):
    """Sixty-four i.i.d. fair bits."""
    return PlannerGenome(int(rng.integers(0, 1 << 32, dtype=np.uint64)) << 32 | int(rng.integers(0, 1 << 32, dtype=np.uint64)))


def mutate_genome(g, p_bit, rng):
    if not 0.0 <= p_bit <= 1.0:
        raise InvalidSpecError("bit flip probability must lie in [0, 1]")
    flips = rng.random(GENOME_BITS) < p_bit
    mask = int("".join("1" if f else "0" for f in flips), 2)
    return PlannerGenome(_coerce(g).value ^ mask)


def crossover_genome(a, b, rng, cut=None):
    """Single-point crossover; ``cut`` in [1, 63] is the prefix length."""
    a, b = _coerce(a), _coerce(b)
    cut = int(rng.integers(1, GENOME_BITS)) if cut is None else int(cut)
    if not 1 <= cut < GENOME_BITS:
        raise InvalidSpecError("cut must lie in [1, 63]")
    low = (1 << (GENOME_BITS - cut)) - 1
    high = MASK64 ^ low
    return PlannerGenome((a.value & high) | (b.value & low)), PlannerGenome((b.value & high) | (a.value & low))


# -- text form ----------------------------------------------------------


def describe(g, codebook=None):
    """One line per token: ``token  bits  name=value``, in layout order."""
    cb = codebook or load_codebook()
    genome = _coerce(g)
    config = decode(genome, cb)
    text = str(genome)
    lines = []
    for f, item in zip(cb.fields, config):
        bits = text[f.offset : f.offset + f.width]
        shown = item
        if f.is_param:
            shown = f"{item} {json_row(cb.param_row(f.name, getattr(config, f.depends_on), item))}"
        lines.append(f"{f.token:<14}{bits:<4} {f.name}={shown}")
    return "\n".join(lines)


def json_row(row):
    import json

    return json.dumps(row, sort_keys=True)


def parse_description(text, codebook=None):
    """Rebuild the genome from :func:`describe` output (reads the bit column)."""
    cb = codebook or load_codebook()
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) != len(cb.fields):
        raise InvalidSpecError(f"expected {len(cb.fields)} lines, got {len(lines)}")
    bits = []
    for f, line in zip(cb.fields, lines):
        parts = line.split()
        if parts[0] != f.token or len(parts[1]) != f.width:
            raise InvalidSpecError(f"malformed line for {f.token}: {line!r}")
        bits.append(parts[1])
    return PlannerGenome.from_string("".join(bits))
