"""Embedding exporter: frozen transformer, layer pooling, HTTP + file output."""

from .encoder import DEFAULT_MODEL, LineEmbedder
from .export import export_file, read_corpus_emails, write_lemb
from .pooling import LAYERS_USED, POOLING_NOTE, PoolingConfig, pool_line
from .service import create_app, serve

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MODEL",
    "LAYERS_USED",
    "LineEmbedder",
    "POOLING_NOTE",
    "PoolingConfig",
    "create_app",
    "export_file",
    "pool_line",
    "read_corpus_emails",
    "serve",
    "write_lemb",
]
