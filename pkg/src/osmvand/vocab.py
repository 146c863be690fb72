"""Bundled tag-key vocabularies.

Both lists ship as plain-text data files so they stay auditable and can be
overridden from the pipeline config.
"""

from __future__ import annotations

from importlib import resources


def _load_key_file(name: str) -> tuple[str, ...]:
    text = resources.files("osmvand.data").joinpath(name).read_text(encoding="utf-8")
    keys = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            keys.append(line)
    return tuple(keys)


def load_keys(path) -> tuple[str, ...]:
    """Load an override key list (one key per line, ``#`` comments allowed)."""
    with open(path, "r", encoding="utf-8") as handle:
        return tuple(
            line.strip() for line in handle if line.strip() and not line.strip().startswith("#")
        )


TOP12_KEYS: tuple[str, ...] = _load_key_file("top12_keys.txt")
VALID_KEYS: tuple[str, ...] = _load_key_file("valid_keys.txt")
