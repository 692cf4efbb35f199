"""
Content-keyed artifact cache on SQLite.

Entries are canonical JSON text with a sha256 checksum. A checksum mismatch or
an undecodable payload discards the entry and reports a miss, so the caller
recomputes. Only the orchestrating process writes.
"""

import hashlib
import logging
import os
import shutil
import sqlite3
import time
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from error_handler import ErrorType, SpectraError, classify_error, error_handler
from exact_codec import dumps, loads

logger = logging.getLogger(__name__)

CACHE_ENV_VAR = "LEHMER_SPECTRA_CACHE"
CACHE_FILENAME = "artifacts.db"


class ArtifactKind(Enum):
    TAU_P = "tau_p"
    CHARPOLY = "charpoly"
    ROOTSET = "rootset"


class RetryStrategy(Enum):
    NO_RETRY = "no_retry"
    EXPONENTIAL_BACKOFF = "exponential_backoff"


@dataclass(frozen=True)
class CacheKey:
    kind: ArtifactKind
    fingerprint: str
    n: int = 0
    precision_bits: int = 0

    def as_tuple(self):
        return (self.kind.value, self.fingerprint, self.n, self.precision_bits)


def default_cache_dir() -> Path:
    """$LEHMER_SPECTRA_CACHE, else ~/.lehmer_spectra"""
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env).expanduser()
    return Path(os.path.expanduser("~")) / ".lehmer_spectra"


def checksum(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _is_lock_error(error: Exception) -> bool:
    message = str(error).lower()
    return isinstance(error, sqlite3.OperationalError) and ("locked" in message or "busy" in message)


class ArtifactCache:
    """Store and load JSON payloads by (kind, fingerprint, n, precision)"""

    def __init__(self, cache_dir: Optional[Path] = None, max_retries: int = 3,
                 base_delay: float = 0.1):
        self.cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.db_path = self.cache_dir / CACHE_FILENAME
        self.max_retries = max_retries
        self.base_delay = base_delay
        self._stats = {"hits": 0, "misses": 0, "stores": 0, "discarded": 0, "retries": 0}
        self._conn = self._open()
        logger.info(f"✅ artifact cache ready at {self.db_path}")

    def _open(self) -> sqlite3.Connection:
        try:
            conn = self._connect()
            conn.execute("SELECT count(*) FROM artifacts").fetchone()
            return conn
        except sqlite3.DatabaseError as e:
            if classify_error(e) != ErrorType.CACHE_CORRUPTION:
                raise SpectraError(
                    message=f"cannot open artifact cache: {e}",
                    error_type=ErrorType.CACHE_ERROR,
                    context={"db_path": str(self.db_path)},
                ) from e
            aside = self.db_path.with_suffix(".corrupt")
            logger.warning(f"⚠️ cache database unreadable ({e}); moved to {aside}")
            shutil.move(str(self.db_path), str(aside))
            self._stats["discarded"] += 1
            return self._connect()

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(str(self.db_path), timeout=30)
        conn.execute("PRAGMA journal_mode=WAL")
        conn.execute("PRAGMA synchronous=NORMAL")
        conn.execute("PRAGMA busy_timeout=30000")
        conn.execute("""
            CREATE TABLE IF NOT EXISTS artifacts (
                kind TEXT NOT NULL,
                fingerprint TEXT NOT NULL,
                n INTEGER NOT NULL,
                precision_bits INTEGER NOT NULL,
                payload TEXT NOT NULL,
                checksum TEXT NOT NULL,
                created_at REAL NOT NULL,
                PRIMARY KEY (kind, fingerprint, n, precision_bits)
            )
        """)
        conn.commit()
        return conn

    @contextmanager
    def get_connection(self):
        try:
            yield self._conn
        except Exception:
            self._conn.rollback()
            raise

    def _calculate_retry_delay(self, strategy: RetryStrategy, retry_count: int) -> float:
        if strategy == RetryStrategy.NO_RETRY:
            return 0
        return min(self.base_delay * 2 ** retry_count, 5.0)

    def execute_with_retry(self, operation: Callable[[], Any],
                           context: Optional[Dict[str, Any]] = None) -> Any:
        """Run `operation`, retrying lock errors with exponential backoff"""
        context = context or {}
        retry_count = 0
        while True:
            try:
                return operation()
            except sqlite3.Error as e:
                strategy = RetryStrategy.EXPONENTIAL_BACKOFF if _is_lock_error(e) else RetryStrategy.NO_RETRY
                if strategy == RetryStrategy.NO_RETRY or retry_count >= self.max_retries:
                    error = error_handler.wrap(e, context)
                    error_handler.log_error(error)
                    raise error from e
                retry_count += 1
                self._stats["retries"] += 1
                delay = self._calculate_retry_delay(strategy, retry_count)
                logger.info(f"🔄 cache locked, retrying in {delay:.2f}s "
                            f"(attempt {retry_count}/{self.max_retries})")
                time.sleep(delay)

    def store(self, key: CacheKey, payload: Any):
        text = dumps(payload)

        def store_operation():
            with self.get_connection() as conn:
                conn.execute(
                    "INSERT OR REPLACE INTO artifacts VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (*key.as_tuple(), text, checksum(text), time.time()),
                )
                conn.commit()

        self.execute_with_retry(store_operation, {"key": key.as_tuple()})
        self._stats["stores"] += 1

    def load(self, key: CacheKey) -> Optional[Any]:
        """Stored payload, or None on a miss or a discarded corrupt entry"""
        def load_operation():
            with self.get_connection() as conn:
                return conn.execute(
                    "SELECT payload, checksum FROM artifacts "
                    "WHERE kind = ? AND fingerprint = ? AND n = ? AND precision_bits = ?",
                    key.as_tuple(),
                ).fetchone()

        row = self.execute_with_retry(load_operation, {"key": key.as_tuple()})
        if row is None:
            self._stats["misses"] += 1
            return None
        text, stored_checksum = row
        try:
            if checksum(text) != stored_checksum:
                raise SpectraError(
                    message="checksum mismatch",
                    error_type=ErrorType.CACHE_CORRUPTION,
                )
            payload = loads(text)
        except (SpectraError, ValueError) as e:
            logger.warning(f"⚠️ discarding corrupt cache entry {key.as_tuple()}: {e}")
            self.discard(key)
            self._stats["discarded"] += 1
            self._stats["misses"] += 1
            return None
        self._stats["hits"] += 1
        return payload

    def load_all(self, kind: ArtifactKind, fingerprint: str, n: int) -> Dict[int, Any]:
        """Every verified payload for (kind, fingerprint, n), by precision"""
        def list_operation():
            with self.get_connection() as conn:
                return conn.execute(
                    "SELECT precision_bits FROM artifacts WHERE kind = ? AND fingerprint = ? AND n = ?",
                    (kind.value, fingerprint, n),
                ).fetchall()

        found = {}
        for (bits,) in self.execute_with_retry(list_operation):
            payload = self.load(CacheKey(kind, fingerprint, n, bits))
            if payload is not None:
                found[bits] = payload
        return found

    def discard(self, key: CacheKey):
        def delete_operation():
            with self.get_connection() as conn:
                conn.execute(
                    "DELETE FROM artifacts "
                    "WHERE kind = ? AND fingerprint = ? AND n = ? AND precision_bits = ?",
                    key.as_tuple(),
                )
                conn.commit()

        self.execute_with_retry(delete_operation, {"key": key.as_tuple()})

    def stats(self) -> Dict[str, int]:
        return dict(self._stats)

    def close(self):
        self._conn.close()

    def __enter__(self) -> "ArtifactCache":
        return self

    def __exit__(self, *exc):
        self.close()
