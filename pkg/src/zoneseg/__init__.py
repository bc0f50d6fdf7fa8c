"""zoneseg: multilingual email zoning.

Splits email bodies into lines, encodes each line as a fixed-dimension
vector, and labels every line with a functional zone (quotation,
paragraph, signature, ...) using a BiLSTM with a linear-chain CRF on
top. Ships evaluation and inter-annotator agreement tooling plus a
synthetic corpus generator for desk-scale experiments.
"""

from .corpus import Corpus, SplitSpec, map_corpus, read_corpus, split_corpus, write_corpus
from .emails import (
    AnnotatedEmail,
    Email,
    Taxonomy,
    TaxonomyMapping,
    builtin_taxonomies,
    builtin_taxonomy,
    load_taxonomy,
    map_annotation,
    split_lines,
)
from .encoders import (
    TRANSFORMER_DIM,
    FeatureEncoder,
    FileEncoder,
    ServiceEncoder,
    encode_corpus,
    encode_email,
    make_encoder,
)
from .exceptions import (
    CorpusParseError,
    DimensionMismatchError,
    LembError,
    LembIndexError,
    LembMagicError,
    LembTruncatedError,
    LembVersionError,
    ServiceError,
    ValidationError,
    ZonesegError,
)
from .features import FEATURE_DIM, FEATURE_NAMES, feature_vector
from .lemb import EmbeddingFile, load_embedding_file, write_embedding_file
from .metrics import (
    AgreementReport,
    EvalReport,
    agreement_report,
    cohens_kappa,
    evaluate,
    render_agreement_table,
    render_eval_report,
)
from .model import ModelParams, init_params, load_model, predict, save_model
from .optim import OptState, init_opt_state, rmsprop_step
from .synth import generate_synthetic_corpus
from .training import TrainConfig, TrainResult, encode_labeled, train, train_on_corpora

__version__ = "0.1.0"

__all__ = [
    "AgreementReport",
    "AnnotatedEmail",
    "Corpus",
    "CorpusParseError",
    "DimensionMismatchError",
    "Email",
    "EmbeddingFile",
    "EvalReport",
    "FEATURE_DIM",
    "FEATURE_NAMES",
    "FeatureEncoder",
    "FileEncoder",
    "LembError",
    "LembIndexError",
    "LembMagicError",
    "LembTruncatedError",
    "LembVersionError",
    "ModelParams",
    "OptState",
    "ServiceEncoder",
    "ServiceError",
    "SplitSpec",
    "Taxonomy",
    "TaxonomyMapping",
    "TrainConfig",
    "TrainResult",
    "TRANSFORMER_DIM",
    "ValidationError",
    "ZonesegError",
    "agreement_report",
    "builtin_taxonomies",
    "builtin_taxonomy",
    "cohens_kappa",
    "encode_corpus",
    "encode_email",
    "encode_labeled",
    "evaluate",
    "feature_vector",
    "generate_synthetic_corpus",
    "init_opt_state",
    "init_params",
    "load_embedding_file",
    "load_model",
    "load_taxonomy",
    "map_annotation",
    "map_corpus",
    "make_encoder",
    "predict",
    "read_corpus",
    "render_agreement_table",
    "render_eval_report",
    "rmsprop_step",
    "save_model",
    "split_corpus",
    "split_lines",
    "train",
    "train_on_corpora",
    "write_corpus",
    "write_embedding_file",
]
