"""Arabic corpus cleaning, clitic segmentation, and subword tokenization."""

from .corpus import (
    Document,
    FilterConfig,
    FilterVerdict,
    IngestStats,
    arabic_ratio,
    filter_document,
    filter_stream,
    load_documents,
)
from .eval import (
    ComparisonReport,
    MetricsRow,
    compare_grid,
    evaluate_model,
    roundtrip_audit,
    token_to_word_ratio,
    unk_rate,
)
from .morphseg import CliticTable, Segmentation, desegment_text, segment_text, segment_word
from .normalize import NormalizerConfig, Placeholders, normalize
from .subword import (
    ALL_KINDS,
    Encoding,
    SPECIALS,
    TokenizerModel,
    count_pretokens,
    decode,
    encode,
    load_model,
    save_model,
    truncate_model,
)
from .trainers import (
    train_bpe,
    train_bpe_morph,
    train_from_pretokens,
    train_wordlevel,
    train_wordpiece,
)

__version__ = "0.1.0"
