"""
Artifact cache tests
Round trips, corruption handling and lock retries on a temporary database.
"""

import os
import sqlite3
import tempfile
import unittest
from pathlib import Path
from unittest.mock import Mock, patch

from artifact_cache import (
    CACHE_ENV_VAR, CACHE_FILENAME, ArtifactCache, ArtifactKind, CacheKey, checksum,
    default_cache_dir,
)
from error_handler import ErrorType, SpectraError


class TestArtifactCache(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.cache = ArtifactCache(Path(self.tmp.name), base_delay=0)
        self.key = CacheKey(ArtifactKind.CHARPOLY, "fp-1", n=5)

    def tearDown(self):
        self.cache.close()
        self.tmp.cleanup()

    def _tamper(self, payload, digest):
        self.cache._conn.execute(
            "UPDATE artifacts SET payload = ?, checksum = ? WHERE kind = ? AND fingerprint = ?",
            (payload, digest, self.key.kind.value, self.key.fingerprint),
        )
        self.cache._conn.commit()

    def test_round_trip(self):
        payload = {"degree": 2, "coefficients": ["504/1", "48/1", "1/1"]}
        self.cache.store(self.key, payload)
        self.assertEqual(self.cache.load(self.key), payload)
        self.assertEqual(self.cache.stats()["hits"], 1)
        self.assertEqual(self.cache.stats()["stores"], 1)

    def test_miss(self):
        self.assertIsNone(self.cache.load(CacheKey(ArtifactKind.TAU_P, "nothing")))
        self.assertEqual(self.cache.stats()["misses"], 1)

    def test_checksum_mismatch_discards_entry(self):
        self.cache.store(self.key, {"a": "1"})
        self._tamper('{"a": "2"}', "0" * 64)
        with self.assertLogs("artifact_cache", level="WARNING"):
            self.assertIsNone(self.cache.load(self.key))
        self.assertEqual(self.cache.stats()["discarded"], 1)
        self.assertIsNone(self.cache.load(self.key))
        self.assertEqual(self.cache.stats()["discarded"], 1)

    def test_undecodable_payload_discards_entry(self):
        self.cache.store(self.key, {"a": "1"})
        self._tamper("{not json", checksum("{not json"))
        self.assertIsNone(self.cache.load(self.key))
        self.assertEqual(self.cache.stats()["discarded"], 1)

    def test_load_all_by_precision(self):
        for bits in (384, 768):
            self.cache.store(CacheKey(ArtifactKind.ROOTSET, "fp-2", 7, bits), {"bits": bits})
        self.cache.store(CacheKey(ArtifactKind.ROOTSET, "fp-2", 8, 384), {"bits": 0})
        found = self.cache.load_all(ArtifactKind.ROOTSET, "fp-2", 7)
        self.assertEqual(found, {384: {"bits": 384}, 768: {"bits": 768}})

    def test_lock_errors_are_retried(self):
        operation = Mock(side_effect=[sqlite3.OperationalError("database is locked"), "done"])
        self.assertEqual(self.cache.execute_with_retry(operation), "done")
        self.assertEqual(operation.call_count, 2)
        self.assertEqual(self.cache.stats()["retries"], 1)

    def test_retries_are_bounded(self):
        operation = Mock(side_effect=sqlite3.OperationalError("database is locked"))
        with self.assertRaises(SpectraError) as ctx:
            self.cache.execute_with_retry(operation)
        self.assertEqual(ctx.exception.error_type, ErrorType.CACHE_ERROR)
        self.assertEqual(operation.call_count, self.cache.max_retries + 1)

    def test_other_errors_are_not_retried(self):
        operation = Mock(side_effect=sqlite3.IntegrityError("constraint failed"))
        with self.assertRaises(SpectraError) as ctx:
            self.cache.execute_with_retry(operation, {"key": "x"})
        self.assertEqual(ctx.exception.error_type, ErrorType.CACHE_ERROR)
        self.assertEqual(ctx.exception.context["key"], "x")
        self.assertEqual(operation.call_count, 1)


class TestCacheLocation(unittest.TestCase):

    def test_environment_variable(self):
        with tempfile.TemporaryDirectory() as tmp:
            with patch.dict(os.environ, {CACHE_ENV_VAR: tmp}):
                self.assertEqual(default_cache_dir(), Path(tmp))
                with ArtifactCache() as cache:
                    self.assertEqual(cache.db_path, Path(tmp) / CACHE_FILENAME)

    def test_unreadable_database_is_moved_aside(self):
        with tempfile.TemporaryDirectory() as tmp:
            (Path(tmp) / CACHE_FILENAME).write_bytes(b"definitely not sqlite " * 100)
            with self.assertLogs("artifact_cache", level="WARNING"):
                cache = ArtifactCache(Path(tmp))
            try:
                self.assertTrue((Path(tmp) / "artifacts.corrupt").exists())
                self.assertEqual(cache.stats()["discarded"], 1)
                key = CacheKey(ArtifactKind.TAU_P, "fp")
                cache.store(key, {"ok": True})
                self.assertEqual(cache.load(key), {"ok": True})
            finally:
                cache.close()


def run_artifact_cache_tests():
    test_suite = unittest.TestSuite()
    for test_class in [TestArtifactCache, TestCacheLocation]:
        test_suite.addTests(unittest.TestLoader().loadTestsFromTestCase(test_class))
    return unittest.TextTestRunner(verbosity=2).run(test_suite).wasSuccessful()


if __name__ == "__main__":
    unittest.main()
