import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

DEFAULT_WILDCARD = "${JT_ID}"
_POSITIONAL = re.compile(r"\$\{(\d+)\}")


@dataclass(frozen=True)
class SubstitutionContext:
    coordinates: Tuple[str, ...] = field(default_factory=tuple)
    label: Optional[str] = None


@lru_cache(maxsize=8)
def _tag_pattern(wildcard):
    return re.compile(rf"\$\{{(\d+)\}}|{re.escape(wildcard)}")


def substitute(text, ctx, wildcard=DEFAULT_WILDCARD):
    """Replaces ``${i}`` by the i-th coordinate and the wildcard by the label.

    Single left-to-right pass: inserted values are never scanned again.
    Tags beyond the known coordinates, or the index tag without a label,
    are left as written.
    """
    def replace(match):
        if match.group(1) is None:
            return ctx.label if ctx.label is not None else match.group(0)
        index = int(match.group(1))
        if 1 <= index <= len(ctx.coordinates):
            return ctx.coordinates[index - 1]
        return match.group(0)

    return _tag_pattern(wildcard).sub(replace, text)


def referenced_positions(text):
    return {int(number) for number in _POSITIONAL.findall(text)}


def has_tags(text, wildcard=DEFAULT_WILDCARD):
    return bool(_POSITIONAL.search(text)) or wildcard in text
