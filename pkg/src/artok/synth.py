"""Seeded synthetic Arabic corpus generator.

Builds a desk-scale JSONL corpus with a Zipfian stem lexicon, clitic
attachment drawn from the standard proclitic/enclitic inventory, and a
controlled dose of web noise (markup, URLs, diacritics, elongations,
navigation-like and non-Arabic documents) so the full filter/normalize/
segment/train pipeline gets exercised end to end. Everything is a pure
function of the seed, which the determinism and benchmark tests rely on.
"""

from __future__ import annotations

import itertools
import json
import random
from pathlib import Path

# Letters weighted roughly by corpus frequency in MSA text.
_LETTERS = "الميونترهبعدسكقفحجشصرخطزضغذثظء"
_LETTER_WEIGHTS = [10, 9, 6, 7, 6, 5, 6, 5, 5, 5, 4, 4, 3, 3, 3, 3, 3,
                   3, 3, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1]

_PROCLITICS = ["و", "ال", "وال", "بال", "لل", "كال", "فال", "ف"]
_PROCLITIC_WEIGHTS = [28, 30, 8, 12, 6, 4, 3, 4]

_ENCLITICS = ["ها", "ه", "هم", "نا", "ي", "ك", "كم", "ني", "هن", "كما", "هما", "كن"]
_ENCLITIC_WEIGHTS = [20, 20, 12, 10, 12, 8, 5, 4, 3, 2, 2, 2]

_FUNCTION_WORDS = [
    "في", "من", "على", "إلى", "عن", "أن", "إن", "كان", "قد", "لا", "ما",
    "هذا", "هذه", "التي", "الذي", "بين", "بعد", "قبل", "عند", "كل", "غير",
    "حتى", "إذا", "ثم", "أو", "لم", "لن", "هو", "هي", "مع",
]

_HARAKAT = "ًٌٍَُِّْ"

_LATIN_WORDS = ["report", "data", "news", "update", "info", "web", "site", "new"]


def _zipf_cum_weights(n: int, exponent: float = 1.07, shift: float = 2.7) -> list[float]:
    weights = [1.0 / (rank + shift) ** exponent for rank in range(n)]
    return list(itertools.accumulate(weights))


def _make_stems(rng: random.Random, n: int) -> list[str]:
    stems: set[str] = set()
    lengths = [3, 4, 5, 6, 7]
    length_weights = [18, 30, 28, 16, 8]
    while len(stems) < n:
        k = rng.choices(lengths, weights=length_weights, k=1)[0]
        stems.add("".join(rng.choices(_LETTERS, weights=_LETTER_WEIGHTS, k=k)))
    return sorted(stems)


def _noisy_word(rng: random.Random, word: str) -> str:
    r = rng.random()
    if r < 0.35:  # sprinkle diacritics
        out = []
        for ch in word:
            out.append(ch)
            if rng.random() < 0.5:
                out.append(rng.choice(_HARAKAT))
        return "".join(out)
    if r < 0.6:  # tatweel stretch
        pos = rng.randrange(1, len(word))
        return word[:pos] + "ـ" * rng.randint(1, 3) + word[pos:]
    # emphatic elongation of one letter
    pos = rng.randrange(len(word))
    return word[:pos] + word[pos] * rng.randint(3, 5) + word[pos + 1:]


def _dialect_negation(rng: random.Random, stem: str) -> str:
    # circumfix negation pattern around a verb-like stem
    return "مبي" + stem + rng.choice(["ش", "هاش"])


def _content_word(rng: random.Random, stem: str) -> str:
    word = stem
    if rng.random() < 0.33:
        word = rng.choices(_PROCLITICS, weights=_PROCLITIC_WEIGHTS, k=1)[0] + word
    if rng.random() < 0.22:
        word = word + rng.choices(_ENCLITICS, weights=_ENCLITIC_WEIGHTS, k=1)[0]
    return word


def _content_doc(rng: random.Random, stems: list[str], cum: list[float]) -> str:
    n_words = rng.randint(40, 150)
    picks = rng.choices(stems, cum_weights=cum, k=n_words)
    words: list[str] = []
    for stem in picks:
        r = rng.random()
        if r < 0.12:
            word = rng.choice(_FUNCTION_WORDS)
        elif r < 0.125:
            word = rng.choice([
                "https://example.com/" + str(rng.randrange(10, 9999)),
                "www.akhbar" + str(rng.randrange(10, 99)) + ".net/page",
            ])
        elif r < 0.13:
            word = f"user{rng.randrange(100)}@mail.com"
        elif r < 0.135:
            word = "@user" + str(rng.randrange(1000))
        elif r < 0.15:
            word = rng.choice([
                str(rng.randrange(1900, 2030)),
                "".join(chr(0x0660 + int(d)) for d in str(rng.randrange(1, 10000))),
            ])
        elif r < 0.16:
            word = rng.choice(_LATIN_WORDS)
        elif r < 0.168:
            word = _dialect_negation(rng, stem)
        elif r < 0.21:
            word = _noisy_word(rng, _content_word(rng, stem))
        else:
            word = _content_word(rng, stem)
        if rng.random() < 0.1:
            word += rng.choices(["،", ".", "؟"], weights=[5, 4, 1], k=1)[0]
        words.append(word)
    text = " ".join(words)
    style = rng.random()
    if style < 0.02:
        text = "<p>" + text + "</p>"
    elif style < 0.03:
        text = text.replace(" ", " &nbsp; ", 1)
    return text


def _noise_doc(rng: random.Random) -> str:
    r = rng.random()
    if r < 0.4:  # too short
        return "عنوان قصير"
    if r < 0.7:  # mostly Latin
        return " ".join(rng.choices(_LATIN_WORDS, k=rng.randint(20, 40)))
    if r < 0.85:  # navigation-like link list
        return "\n".join("الرئيسية" for _ in range(rng.randint(8, 15)))
    return "   "


def build_corpus(
    path: str | Path,
    target_bytes: int = 22_000_000,
    seed: int = 0,
    n_stems: int = 26000,
) -> dict:
    """Write a JSONL corpus whose kept (filterable) documents total at
    least target_bytes of UTF-8 text. Returns generation stats."""
    rng = random.Random(seed)
    stems = _make_stems(rng, n_stems)
    cum = _zipf_cum_weights(len(stems))
    n_docs = 0
    kept_bytes = 0
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        while kept_bytes < target_bytes:
            n_docs += 1
            if rng.random() < 0.05:
                text = _noise_doc(rng)
            else:
                text = _content_doc(rng, stems, cum)
                kept_bytes += len(text.encode("utf-8"))
            record = {"id": f"synth-{n_docs}", "text": text, "source": "synth"}
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
    return {"documents": n_docs, "content_bytes": kept_bytes, "stems": len(stems)}
