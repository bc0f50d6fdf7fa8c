"""Line-embedding backends behind one interface.

Three interchangeable backends turn an email into one vector per line:

* ``features``  -- the native hand-crafted feature encoder (no I/O),
* ``file``      -- precomputed embeddings from a binary embedding file,
* ``service``   -- an HTTP embedding service speaking the wire protocol
                   ``POST /v1/embed {"lines": [...]}``.

Because the heavyweight sentence encoder is frozen during training, its
embeddings are constants; precomputing them to a file makes everything
downstream runnable without any ML runtime. ``TRANSFORMER_DIM`` is the
output width of the default transformer-based exporter (4 pooled layers
of a 768-wide model).

Backends are read-only after construction and safe for concurrent
encode calls.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
import requests

from .corpus import Corpus
from .emails import Email
from .exceptions import DimensionMismatchError, LembIndexError, ServiceError, ValidationError
from .features import FEATURE_DIM, feature_vector
from .lemb import EmbeddingFile, load_embedding_file

TRANSFORMER_DIM = 3072

EMBED_ROUTE = "/v1/embed"
HEALTH_ROUTE = "/v1/health"


class FeatureEncoder:
    """Deterministic hand-crafted features; needs no external resources."""

    kind = "features"

    @property
    def dim(self) -> int:
        return FEATURE_DIM

    def encode_email(self, email: Email) -> np.ndarray:
        return np.stack([feature_vector(line) for line in email.lines])


class FileEncoder:
    """Precomputed embeddings addressed by email id via the sidecar index."""

    kind = "file"

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._file: EmbeddingFile = load_embedding_file(self.path)

    @property
    def dim(self) -> int:
        return self._file.dim

    def encode_email(self, email: Email) -> np.ndarray:
        rows = self._file.email_rows(email.id)
        if rows.shape[0] != len(email.lines):
            raise LembIndexError(
                f"email {email.id!r}: index holds {rows.shape[0]} rows for "
                f"{len(email.lines)} lines"
            )
        return rows.astype(np.float64)


class ServiceEncoder:
    """Client for an embedding service; one request per encoded email.

    ``dim`` may be declared up front; the first response pins it
    otherwise. Any response whose dimension disagrees with the pinned
    value raises ``DimensionMismatchError``. Concurrent ``embed_lines``
    calls are safe: each call issues its own request.
    """

    kind = "service"

    def __init__(self, url: str, dim: int | None = None, timeout: float = 30.0):
        if dim is not None and dim <= 0:
            raise ValidationError("declared service dim must be positive")
        self.url = url.rstrip("/")
        self.timeout = timeout
        self._dim = dim

    @property
    def dim(self) -> int:
        if self._dim is None:
            self._dim = int(self._health()["dim"])
        return self._dim

    def _health(self) -> dict:
        try:
            resp = requests.get(self.url + HEALTH_ROUTE, timeout=self.timeout)
        except requests.RequestException as e:
            raise ServiceError(f"health check failed for {self.url}: {e}") from e
        if resp.status_code != 200:
            raise ServiceError(f"health check returned HTTP {resp.status_code}")
        return resp.json()

    def embed_lines(self, lines: Sequence[str]) -> np.ndarray:
        """Embed a batch of lines; returns an (n_lines, dim) float64 array."""
        if len(lines) == 0:
            raise ValidationError("embed_lines requires at least one line")
        try:
            resp = requests.post(
                self.url + EMBED_ROUTE, json={"lines": list(lines)}, timeout=self.timeout
            )
        except requests.RequestException as e:
            raise ServiceError(f"embedding request to {self.url} failed: {e}") from e
        if resp.status_code != 200:
            raise ServiceError(
                f"embedding service returned HTTP {resp.status_code}: {resp.text[:200]}"
            )
        try:
            payload = resp.json()
            dim = int(payload["dim"])
            matrix = np.asarray(payload["embeddings"], dtype=np.float64)
        except (ValueError, KeyError, TypeError) as e:
            raise ServiceError(f"malformed embedding response: {e}") from e
        if matrix.ndim != 2 or matrix.shape[1] != dim:
            raise ServiceError(
                f"embedding response shape {matrix.shape} disagrees with dim {dim}"
            )
        if matrix.shape[0] != len(lines):
            raise ServiceError(
                f"embedding service returned {matrix.shape[0]} rows for "
                f"{len(lines)} lines"
            )
        if self._dim is None:
            self._dim = dim
        elif dim != self._dim:
            raise DimensionMismatchError(
                f"service returned dim {dim}, expected {self._dim}"
            )
        if not np.all(np.isfinite(matrix)):
            raise ServiceError("embedding response contains non-finite values")
        return matrix

    def encode_email(self, email: Email) -> np.ndarray:
        return self.embed_lines(list(email.lines))


Encoder = FeatureEncoder | FileEncoder | ServiceEncoder


def make_encoder(spec: str, dim: int | None = None, timeout: float = 30.0) -> Encoder:
    """Build an encoder from a spec string.

    ``"features"`` selects the native encoder, ``"file:PATH"`` a
    precomputed embedding file, ``"service:URL"`` an embedding service.
    """
    if spec == "features":
        return FeatureEncoder()
    if spec.startswith("file:"):
        return FileEncoder(spec[len("file:") :])
    if spec.startswith("service:"):
        return ServiceEncoder(spec[len("service:") :], dim=dim, timeout=timeout)
    raise ValidationError(
        f"unknown encoder spec {spec!r}; use 'features', 'file:PATH', or 'service:URL'"
    )


def encode_email(encoder: Encoder, email: Email) -> np.ndarray:
    """One embedding per line, in line order, shape (n_lines, dim)."""
    matrix = encoder.encode_email(email)
    if matrix.shape[0] != len(email.lines):
        raise ValidationError(
            f"encoder produced {matrix.shape[0]} vectors for {len(email.lines)} lines"
        )
    return matrix


def encode_corpus(encoder: Encoder, corpus: Corpus) -> list[np.ndarray]:
    return [encode_email(encoder, a.email) for a in corpus.emails]
