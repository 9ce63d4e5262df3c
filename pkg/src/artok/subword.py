"""Shared tokenizer model: vocabulary/id space, encoding, serialization.

All four tokenizer kinds share one model shape: dense ids with the five
reserved tokens at ids 0-4, word-initial symbols stored bare and
word-internal symbols carrying the "##" continuation prefix. A model
embeds the normalizer config (and, for bpe_morph, the clitic table) it
was trained with, so encoding always re-applies the exact training-time
preprocessing.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import Document
from .morphseg import CliticTable, desegment_text, segment_word, _segmentable
from .normalize import NormalizerConfig, normalize

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
CONT_PREFIX = "##"

PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
SPECIALS = (PAD_TOKEN, UNK_TOKEN, "[CLS]", "[SEP]", "[MASK]")
UNK_ID = 1

KIND_BPE = "bpe"
KIND_WORDPIECE = "wordpiece"
KIND_WORDLEVEL = "wordlevel"
KIND_BPE_MORPH = "bpe_morph"
ALL_KINDS = (KIND_BPE, KIND_WORDPIECE, KIND_WORDLEVEL, KIND_BPE_MORPH)

# Kinds that encode by replaying a merge list.
MERGE_KINDS = (KIND_BPE, KIND_BPE_MORPH)

WORDPIECE_MAX_WORD_CHARS = 100


class ModelFormatError(ValueError):
    """Raised when a serialized model bundle fails validation."""


@dataclass
class Encoding:
    ids: list[int]
    tokens: list[str]
    word_count: int


@dataclass
class TokenizerModel:
    kind: str
    vocab: list[str]
    merges: list[tuple[str, str]]
    normalizer: NormalizerConfig
    clitic_table: CliticTable | None = None
    specials: tuple[str, ...] = SPECIALS
    continuation_prefix: str = CONT_PREFIX
    # Lazily built encode-time indexes; never serialized.
    _token_to_id: dict = field(default=None, repr=False, compare=False)
    _merge_ranks: dict = field(default=None, repr=False, compare=False)
    _word_cache: dict = field(default=None, repr=False, compare=False)
    _seg_cache: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown tokenizer kind: {self.kind!r}")
        if self.kind == KIND_BPE_MORPH and self.clitic_table is None:
            raise ValueError("bpe_morph model requires a clitic table")

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def token_to_id(self) -> dict:
        if self._token_to_id is None:
            self._token_to_id = {tok: i for i, tok in enumerate(self.vocab)}
        return self._token_to_id


def word_symbols(word: str) -> list[str]:
    """Split a pre-token into its initial symbol alphabet: first character
    bare, every following character prefixed with the continuation mark."""
    return [word[0]] + [CONT_PREFIX + ch for ch in word[1:]]


def merge_output(left: str, right: str) -> str:
    """Token string produced by merging an adjacent symbol pair. The right
    symbol is always word-internal, so its prefix folds away."""
    if not right.startswith(CONT_PREFIX):
        raise ValueError(f"right side of a merge must be a continuation: {right!r}")
    return left + right[len(CONT_PREFIX):]


# ---------------------------------------------------------------------------
# Pre-token counting (shared training front-end)


def _segment_cached(word: str, table: CliticTable, cache: dict) -> list[str]:
    segs = cache.get(word)
    if segs is None:
        segs = segment_word(word, table).segments if _segmentable(word) else [word]
        cache[word] = segs
    return segs


def pretokenize(text: str, kind: str, normalizer: NormalizerConfig,
                clitic_table: CliticTable | None = None,
                seg_cache: dict | None = None) -> tuple[list[str], int]:
    """Normalize text and split it into pre-tokens.

    Returns (pre_tokens, word_count) where word_count is always the
    whitespace word count of the normalized text: for bpe_morph the
    pre-tokens are morph segments, but ratio denominators stay in words.
    """
    words = normalize(text, normalizer).split()
    if kind != KIND_BPE_MORPH:
        return words, len(words)
    if clitic_table is None:
        raise ValueError("bpe_morph pretokenization requires a clitic table")
    cache = seg_cache if seg_cache is not None else {}
    pretoks: list[str] = []
    for w in words:
        pretoks.extend(_segment_cached(w, clitic_table, cache))
    return pretoks, len(words)


def _count_batch(texts: list[str], kind: str, normalizer_dict: dict,
                 table_dict: dict | None) -> dict:
    normalizer = NormalizerConfig.from_dict(normalizer_dict)
    table = CliticTable.from_dict(table_dict) if table_dict else None
    counts: Counter = Counter()
    cache: dict = {}
    for text in texts:
        pretoks, _ = pretokenize(text, kind, normalizer, table, cache)
        counts.update(pretoks)
    return dict(counts)


def _batched(items: Iterable, size: int) -> Iterator[list]:
    batch: list = []
    for item in items:
        batch.append(item)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch


def count_pretokens(
    corpus: Iterable[Document],
    kind: str,
    normalizer: NormalizerConfig,
    clitic_table: CliticTable | None = None,
    workers: int = 1,
) -> Counter:
    """Tally pre-token frequencies over a filtered document stream.

    Counts are order-free, so the corpus may be sharded across worker
    processes and the shard counters summed.
    """
    texts = (doc.text for doc in corpus)
    if workers <= 1:
        return Counter(_count_batch(list(texts), kind, normalizer.to_dict(),
                                    clitic_table.to_dict() if clitic_table else None))
    counts: Counter = Counter()
    norm_dict = normalizer.to_dict()
    table_dict = clitic_table.to_dict() if clitic_table else None
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_count_batch, batch, kind, norm_dict, table_dict)
            for batch in _batched(texts, 2000)
        ]
        for fut in futures:
            counts.update(fut.result())
    return counts


# ---------------------------------------------------------------------------
# Encoding / decoding


def _bpe_encode_word(model: TokenizerModel, word: str) -> list[str]:
    ranks = model._merge_ranks
    syms = word_symbols(word)
    while len(syms) > 1:
        best_rank = None
        best_pair = None
        for i in range(len(syms) - 1):
            rank = ranks.get((syms[i], syms[i + 1]))
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
                best_pair = (syms[i], syms[i + 1])
        if best_pair is None:
            break
        a, b = best_pair
        merged = merge_output(a, b)
        out: list[str] = []
        i = 0
        n = len(syms)
        while i < n:
            if i < n - 1 and syms[i] == a and syms[i + 1] == b:
                out.append(merged)
                i += 2
            else:
                out.append(syms[i])
                i += 1
        syms = out
    return syms


def _wordpiece_encode_word(model: TokenizerModel, word: str) -> list[str]:
    if len(word) > WORDPIECE_MAX_WORD_CHARS:
        return [UNK_TOKEN]
    vocab = model.token_to_id()
    pieces: list[str] = []
    start = 0
    n = len(word)
    while start < n:
        end = n
        piece = None
        while end > start:
            cand = word[start:end]
            if start > 0:
                cand = CONT_PREFIX + cand
            if cand in vocab:
                piece = cand
                break
            end -= 1
        if piece is None:
            return [UNK_TOKEN]
        pieces.append(piece)
        start = end
    return pieces


def _encode_word(model: TokenizerModel, word: str) -> tuple[list[int], list[str]]:
    cache = model._word_cache
    hit = cache.get(word)
    if hit is not None:
        return hit
    vocab = model.token_to_id()
    if model.kind == KIND_WORDLEVEL:
        tokens = [word if word in vocab else UNK_TOKEN]
    elif model.kind == KIND_WORDPIECE:
        tokens = _wordpiece_encode_word(model, word)
    else:
        tokens = [t if t in vocab else UNK_TOKEN for t in _bpe_encode_word(model, word)]
    ids = [vocab[t] if t in vocab else UNK_ID for t in tokens]
    tokens = [model.vocab[i] for i in ids]
    result = (ids, tokens)
    cache[word] = result
    return result


def _prepare_encoder(model: TokenizerModel) -> None:
    if model._word_cache is None:
        model.token_to_id()
        model._merge_ranks = {tuple(m): r for r, m in enumerate(model.merges)}
        model._word_cache = {}
        model._seg_cache = {}


def encode(model: TokenizerModel, text: str) -> Encoding:
    """Normalize, pre-tokenize and tokenize text with a trained model."""
    _prepare_encoder(model)
    pretoks, word_count = pretokenize(
        text, model.kind, model.normalizer, model.clitic_table, model._seg_cache
    )
    ids: list[int] = []
    tokens: list[str] = []
    for word in pretoks:
        wids, wtoks = _encode_word(model, word)
        ids.extend(wids)
        tokens.extend(wtoks)
    return Encoding(ids=ids, tokens=tokens, word_count=word_count)


def decode(model: TokenizerModel, ids: Iterable[int]) -> str:
    """Map ids back to text: continuations glue to the previous piece,
    other tokens join with single spaces, reserved tokens other than
    [UNK] drop, and morph segment markers are resolved afterwards."""
    dropped = set(model.specials) - {UNK_TOKEN}
    pieces: list[str] = []
    for i in ids:
        if not 0 <= i < len(model.vocab):
            raise ValueError(f"token id out of range: {i}")
        tok = model.vocab[i]
        if tok in dropped:
            continue
        if tok.startswith(CONT_PREFIX) and pieces:
            pieces[-1] += tok[len(CONT_PREFIX):]
        elif tok.startswith(CONT_PREFIX):
            pieces.append(tok[len(CONT_PREFIX):])
        else:
            pieces.append(tok)
    text = " ".join(pieces)
    if model.kind == KIND_BPE_MORPH:
        text = desegment_text(text)
    return text


# ---------------------------------------------------------------------------
# Serialization


def _canonical_payload(model: TokenizerModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "continuation_prefix": model.continuation_prefix,
        "specials": list(model.specials),
        "normalizer": model.normalizer.to_dict(),
        "clitic_table": model.clitic_table.to_dict() if model.clitic_table else None,
        "vocab": list(model.vocab),
        "merges": [list(m) for m in model.merges],
    }


def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _checksum(payload: dict) -> str:
    return hashlib.sha256(_dumps(payload).encode("utf-8")).hexdigest()


def atomic_write_text(path: str | Path, content: str) -> None:
    """Write via a temp file in the target directory plus rename, so a
    failure never leaves a partial output file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(model: TokenizerModel, path: str | Path) -> None:
    """Serialize to a single JSON bundle; byte-identical across re-saves."""
    payload = _canonical_payload(model)
    payload["checksum"] = _checksum(_canonical_payload(model))
    atomic_write_text(path, _dumps(payload) + "\n")


def validate_model(model: TokenizerModel) -> None:
    if list(model.vocab[:len(SPECIALS)]) != list(SPECIALS):
        raise ModelFormatError("reserved tokens must occupy ids 0-4")
    if len(set(model.vocab)) != len(model.vocab):
        raise ModelFormatError("vocabulary contains duplicate tokens")
    if model.kind == KIND_WORDLEVEL and model.merges:
        raise ModelFormatError("wordlevel model must not carry merges")
    vocab_set = set(model.vocab)
    for left, right in model.merges:
        if left not in vocab_set or right not in vocab_set:
            raise ModelFormatError(f"merge input missing from vocab: {(left, right)}")
        if merge_output(left, right) not in vocab_set:
            raise ModelFormatError(f"merge output missing from vocab: {(left, right)}")


def load_model(path: str | Path) -> TokenizerModel:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version: {version!r}")
    stored = data.pop("checksum", None)
    if stored is not None and stored != _checksum(data):
        raise ModelFormatError("model bundle checksum mismatch")
    if data.get("kind") != KIND_WORDLEVEL and "merges" not in data:
        raise ModelFormatError(f"kind {data.get('kind')!r} requires a merge list")
    try:
        model = TokenizerModel(
            kind=data["kind"],
            vocab=list(data["vocab"]),
            merges=[(a, b) for a, b in data["merges"]],
            normalizer=NormalizerConfig.from_dict(data["normalizer"]),
            clitic_table=(
                CliticTable.from_dict(data["clitic_table"])
                if data.get("clitic_table") else None
            ),
            specials=tuple(data["specials"]),
            continuation_prefix=data["continuation_prefix"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model bundle: {exc}") from exc
    validate_model(model)
    return model


def export_vocab_txt(model: TokenizerModel, path: str | Path) -> None:
    """One token per line; line number equals token id."""
    atomic_write_text(path, "".join(tok + "\n" for tok in model.vocab))


def export_merges_txt(model: TokenizerModel, path: str | Path) -> None:
    """One "left right" pair per line; file order is merge priority."""
    atomic_write_text(path, "".join(f"{a} {b}\n" for a, b in model.merges))


def truncate_model(model: TokenizerModel, vocab_size: int) -> TokenizerModel:
    """Derive the smaller-vocabulary model that training to vocab_size on
    the same corpus would have produced.

    Valid because merge selection never depends on the target size: the
    smaller model's vocab and merge list are exact prefixes.
    """
    if vocab_size >= len(model.vocab):
        return TokenizerModel(
            kind=model.kind, vocab=list(model.vocab), merges=list(model.merges),
            normalizer=model.normalizer, clitic_table=model.clitic_table,
            specials=model.specials, continuation_prefix=model.continuation_prefix,
        )
    if model.kind == KIND_WORDLEVEL:
        # frequency-ranked vocab: the prefix is exactly the smaller model
        if vocab_size < len(model.specials):
            raise ValueError("cannot truncate below the reserved tokens")
        return TokenizerModel(
            kind=model.kind, vocab=list(model.vocab[:vocab_size]), merges=[],
            normalizer=model.normalizer, clitic_table=model.clitic_table,
            specials=model.specials, continuation_prefix=model.continuation_prefix,
        )
    alphabet_len = len(model.vocab) - len(model.specials) - len(model.merges)
    n_merges = vocab_size - len(model.specials) - alphabet_len
    if n_merges < 0:
        raise ValueError(
            f"cannot truncate below specials + alphabet ({len(model.specials) + alphabet_len})"
        )
    return TokenizerModel(
        kind=model.kind,
        vocab=list(model.vocab[:vocab_size]),
        merges=list(model.merges[:n_merges]),
        normalizer=model.normalizer,
        clitic_table=model.clitic_table,
        specials=model.specials,
        continuation_prefix=model.continuation_prefix,
    )
