"""Content-addressed on-disk cache for exact tables.

An entry is a JSON file named by the hash of its run configuration. Writes go
to a temporary file in the cache directory and are moved into place with
``os.replace``, so concurrent writers of the same key both succeed and readers
never see a partial file. Entries written by another code version are treated
as absent and left on disk.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from ._version import CODE_VERSION

ENV_VAR = "PRUDENTWALK_CACHE_DIR"


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass(frozen=True)
class CacheEntry:
    config_hash: str
    code_version: str
    payload: str
    created: float


class ResultCache:
    def __init__(self, directory, code_version: str = CODE_VERSION):
        self.directory = Path(directory)
        self.code_version = code_version

    @classmethod
    def from_env(cls, directory=None) -> "ResultCache | None":
        directory = directory or os.environ.get(ENV_VAR)
        return cls(directory) if directory else None

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, config: dict) -> CacheEntry | None:
        key = config_hash(config)
        try:
            doc = json.loads(self._path(key).read_text())
        except FileNotFoundError:
            return None
        if doc.get("code_version") != self.code_version or doc.get("config_hash") != key:
            return None
        return CacheEntry(key, doc["code_version"], doc["payload"], doc["created"])

    def put(self, config: dict, payload: str) -> CacheEntry:
        key = config_hash(config)
        entry = CacheEntry(key, self.code_version, payload, time.time())
        self.directory.mkdir(parents=True, exist_ok=True)
        doc = {"config_hash": key, "code_version": entry.code_version, "config": config,
               "payload": payload, "created": entry.created}
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=f".{key[:12]}-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(doc, fh, sort_keys=True)
            os.replace(tmp, self._path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return entry
