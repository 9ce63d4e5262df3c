"""Arabic text cleaning as an ordered pipeline of pure string transforms.

Every transform is a pure function; the full pipeline order is fixed
(markup -> entity placeholders -> tatweel -> diacritics -> digits ->
repeat collapsing -> whitespace canonicalization) and each step is gated
by a config flag. The pipeline is idempotent for every configuration,
which lets a trained tokenizer re-apply it at encode time without
tracking whether its input was already cleaned.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, asdict

TATWEEL = "ـ"

# Harakat fathatan..sukun plus the superscript alef.
_DIACRITICS_RE = re.compile("[ً-ْٰ]")

# Arabic-Indic and Extended Arabic-Indic digits, positionally onto ASCII.
_DIGIT_MAP = str.maketrans(
    "٠١٢٣٤٥٦٧٨٩"
    "۰۱۲۳۴۵۶۷۸۹",
    "0123456789" * 2,
)

_TAG_RE = re.compile(r"<[^>]*>")
# &amp; decoded last so "&amp;lt;" needs a second pass; strip_markup loops
# to a fixed point for that reason.
_ENTITIES = [
    ("&lt;", "<"),
    ("&gt;", ">"),
    ("&quot;", '"'),
    ("&nbsp;", " "),
    ("&amp;", "&"),
]

_URL_RE = re.compile(r"(?:[A-Za-z][A-Za-z0-9+.-]*://|www\.)\S+")
_EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}")
_MENTION_RE = re.compile(r"@\w+")

_WS_RE = re.compile(r"\s+")


@dataclass
class Placeholders:
    """Replacement tokens for URLs, mentions and emails.

    The defaults are ASCII and contain no whitespace, digits or repeated
    characters, so they are fixed points of the whole pipeline.
    """

    url: str = "[URL]"
    mention: str = "[USER]"
    email: str = "[EMAIL]"


@dataclass
class NormalizerConfig:
    strip_markup: bool = True
    replace_urls: bool = True
    replace_mentions: bool = True
    replace_emails: bool = True
    remove_tatweel: bool = True
    remove_diacritics: bool = True
    map_digits: bool = True
    collapse_repeats: bool = True
    repeat_cap: int = 2

    def __post_init__(self):
        if self.repeat_cap < 1:
            raise ValueError("repeat_cap must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizerConfig":
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown normalizer fields: {sorted(unknown)}")
        return cls(**d)


def remove_tatweel(text: str) -> str:
    """Delete every U+0640 elongation character; nothing else changes."""
    return text.replace(TATWEEL, "")


def remove_diacritics(text: str) -> str:
    """Delete tashkeel marks (U+064B..U+0652) and the superscript alef."""
    return _DIACRITICS_RE.sub("", text)


def map_digits(text: str) -> str:
    """Map Arabic-Indic and Extended Arabic-Indic digits to ASCII 0-9."""
    return text.translate(_DIGIT_MAP)


def strip_markup(text: str) -> str:
    """Drop <...> tags and decode a fixed set of named HTML entities.

    Runs to a fixed point so that entity-encoded tags ("&lt;b&gt;") are
    fully removed in one call; no structural HTML parse is attempted.
    A lone '<' with no closing '>' is left untouched.
    """
    while True:
        out = _TAG_RE.sub("", text)
        for entity, char in _ENTITIES:
            out = out.replace(entity, char)
        if out == text:
            return out
        text = out


def replace_entities(
    text: str,
    placeholders: Placeholders | None = None,
    *,
    urls: bool = True,
    mentions: bool = True,
    emails: bool = True,
) -> str:
    """Replace URLs, emails and @mentions with placeholder tokens.

    URLs are matched first so an address inside a link is not clipped,
    and emails before mentions so "a@b.com" is not read as mention "@b".
    """
    ph = placeholders or Placeholders()
    if urls:
        text = _URL_RE.sub(ph.url, text)
    if emails:
        text = _EMAIL_RE.sub(ph.email, text)
    if mentions:
        text = _MENTION_RE.sub(ph.mention, text)
    return text


def collapse_repeats(text: str, cap: int = 2) -> str:
    """Shorten runs of the same non-digit codepoint longer than cap to cap.

    Digit runs are exempt ("2000" is data, "هههههه" is emphasis).
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    pattern = re.compile(r"(\D)\1{%d,}" % cap)
    return pattern.sub(lambda m: m.group(1) * cap, text)


def normalize(
    text: str,
    cfg: NormalizerConfig | None = None,
    placeholders: Placeholders | None = None,
) -> str:
    """Apply the enabled transforms in the fixed pipeline order.

    Whitespace canonicalization (runs -> single space, trimmed) always
    runs last regardless of configuration.
    """
    cfg = cfg or NormalizerConfig()
    if cfg.strip_markup:
        text = strip_markup(text)
    if cfg.replace_urls or cfg.replace_mentions or cfg.replace_emails:
        text = replace_entities(
            text,
            placeholders,
            urls=cfg.replace_urls,
            mentions=cfg.replace_mentions,
            emails=cfg.replace_emails,
        )
    if cfg.remove_tatweel:
        text = remove_tatweel(text)
    if cfg.remove_diacritics:
        text = remove_diacritics(text)
    if cfg.map_digits:
        text = map_digits(text)
    if cfg.collapse_repeats:
        text = collapse_repeats(text, cfg.repeat_cap)
    return _WS_RE.sub(" ", text).strip()
