"""Keyword classification of post text into crime categories."""
from __future__ import annotations

import re
from .model import CategoryRegistry, IngestError

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)  # alphanumerics only; _ splits too


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character.

    Digits are kept, empty tokens dropped: "Car STOLEN, near 5th!" ->
    ["car", "stolen", "near", "5th"].
    """
    return _TOKEN.findall(text.lower())


class Lexicon:
    """Priority-ordered keyword phrases per category.

    Entry order is priority: when a token list matches phrases from
    several categories, the earliest entry wins. Phrases match on their
    token sequence appearing contiguously in the input tokens.
    """

    def __init__(self, entries: list[tuple[str, list[str]]],
                 registry: CategoryRegistry | None = None):
        if registry is not None:
            for category_id, _ in entries:
                if category_id not in registry:
                    raise IngestError(f"lexicon category {category_id!r} not in registry")
        seen: dict[str, str] = {}
        self.entries: list[tuple[str, list[tuple[str, ...]]]] = []
        for category_id, phrases in entries:
            tokenized = []
            for phrase in phrases:
                if phrase != phrase.lower():
                    raise IngestError(f"lexicon phrase not lowercase: {phrase!r}")
                if phrase in seen and seen[phrase] != category_id:
                    raise IngestError(f"duplicate phrase across categories: {phrase!r}")
                seen[phrase] = category_id
                tokens = tuple(tokenize(phrase))
                if tokens:
                    tokenized.append(tokens)
            self.entries.append((category_id, tokenized))


def _contains_contiguous(tokens: list[str], phrase: tuple[str, ...]) -> bool:
    span = len(phrase)
    for i in range(len(tokens) - span + 1):
        if tuple(tokens[i:i + span]) == phrase:
            return True
    return False


def classify_crime_type(tokens: list[str], lexicon: Lexicon) -> str | None:
    """Highest-priority category with any phrase contiguous in ``tokens``.

    Returns None when nothing matches.
    """
    for category_id, phrases in lexicon.entries:
        for phrase in phrases:
            if _contains_contiguous(tokens, phrase):
                return category_id
    return None
