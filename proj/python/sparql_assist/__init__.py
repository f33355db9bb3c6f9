"""Context-aware SPARQL autocompletion."""

import json

from ._core import (
    ParseError,
    __version__,
    derive_context,
    normalize_label,
    parse_ntriples,
    parse_turtle,
    tokenize,
)
from ._core import _Service

__all__ = [
    "ParseError",
    "Service",
    "ServiceError",
    "__version__",
    "derive_context",
    "normalize_label",
    "parse_ntriples",
    "parse_turtle",
    "tokenize",
]


class ServiceError(Exception):
    def __init__(self, status, code, message):
        super().__init__(f"{status} {code}: {message}")
        self.status = status
        self.code = code


def _decode(status, body):
    doc = json.loads(body)
    if status != 200:
        err = doc["error"]
        raise ServiceError(status, err["code"], err["message"])
    return doc


class Service:
    """In-process assist service.

    `config` is a dict in the same shape as the server's JSON config file.
    Preloading runs in the constructor.
    """

    def __init__(self, config=None, offline=False):
        self._svc = _Service(json.dumps(config or {}), offline)

    def suggest(self, query, cursor=None, langs=None, limit=None, registry=None):
        """The /suggest response as a dict."""
        return _decode(*self._svc.suggest(query, cursor, langs, limit, registry))

    def apply(self, query, cursor, index, langs=None, limit=None, registry=None):
        """Splice suggestion `index` into `query`; returns (text, cursor)."""
        return self._svc.apply(query, cursor, index, langs, limit, registry)

    def load_graph(self, iri):
        return _decode(*self._svc.load_graph(iri))

    @property
    def ready(self):
        return self._svc.ready()

    def readiness(self):
        return json.loads(self._svc.ready_body())

    @property
    def generation(self):
        return self._svc.generation

    @property
    def term_count(self):
        return self._svc.term_count
