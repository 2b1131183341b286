"""Plain-text ``key = value`` block grammar.

One grammar serves both calibration files and pipeline configs:

* a line is either blank, a ``#`` comment, or ``key = value``
* values are whitespace-separated tokens (numbers or words)
* one or more blank lines end the current block and start the next
* keys must be unique within a block

Parsers built on top decide which keys each block must carry.
"""

from __future__ import annotations

from .errors import ConfigError


def parse_blocks(text: str, source: str = "<string>") -> list[dict[str, str]]:
    """Split text into blocks of key/value pairs."""
    blocks: list[dict[str, str]] = []
    current: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            if current:
                blocks.append(current)
                current = {}
            continue
        if line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in current:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} in block")
        current[key] = value
    if current:
        blocks.append(current)
    return blocks


def parse_blocks_file(path) -> list[dict[str, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_blocks(fh.read(), source=str(path))


def require(block: dict[str, str], key: str, source: str) -> str:
    if key not in block:
        raise ConfigError(f"{source}: missing required key {key!r}")
    return block[key]


def floats(block: dict[str, str], key: str, count: int, source: str) -> list[float]:
    """Fetch a key whose value is exactly `count` floats."""
    tokens = require(block, key, source).split()
    if len(tokens) != count:
        raise ConfigError(f"{source}: key {key!r} needs {count} numbers, got {len(tokens)}")
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise ConfigError(f"{source}: key {key!r}: {exc}") from exc


def ints(block: dict[str, str], key: str, count: int, source: str) -> list[int]:
    tokens = require(block, key, source).split()
    if len(tokens) != count:
        raise ConfigError(f"{source}: key {key!r} needs {count} integers, got {len(tokens)}")
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise ConfigError(f"{source}: key {key!r}: {exc}") from exc
