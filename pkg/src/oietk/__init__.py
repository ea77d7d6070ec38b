"""oietk: dataset engineering, codecs, tag alignment, scoring and embedding
composition kernels for open information extraction pipelines."""

from .model import (
    DatasetRecord,
    ExtractionSet,
    Sentence,
    Token,
    Triple,
    normalize_token_text,
    read_jsonl,
    tuple_equal,
    write_jsonl,
)

__version__ = "0.1.0"

__all__ = [
    "DatasetRecord",
    "ExtractionSet",
    "Sentence",
    "Token",
    "Triple",
    "normalize_token_text",
    "read_jsonl",
    "tuple_equal",
    "write_jsonl",
    "__version__",
]
