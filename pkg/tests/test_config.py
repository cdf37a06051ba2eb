import unittest
from unittest.mock import patch
import os
import sys

# Add src directory to sys.path to allow importing EngineConfig
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from operformal.config import DEFAULT_DENSE_THRESHOLD, DEFAULT_THREADS, EngineConfig


class TestEngineConfig(unittest.TestCase):

    @patch.dict(os.environ, {}, clear=True)
    def test_defaults(self):
        """Test both settings fall back to their defaults when unset."""
        config = EngineConfig()
        self.assertEqual(config.threads, DEFAULT_THREADS)
        self.assertEqual(config.dense_threshold, DEFAULT_DENSE_THRESHOLD)

    @patch.dict(os.environ, {"OPERFORMAL_THREADS": "4"}, clear=True)
    def test_threads_from_environ(self):
        """Test OPERFORMAL_THREADS caps the worker count."""
        config = EngineConfig()
        self.assertEqual(config.threads, 4)
        self.assertEqual(config.max_workers, 4)

    @patch.dict(os.environ, {"OPERFORMAL_THREADS": "many"}, clear=True)
    def test_threads_not_an_integer(self):
        """Test a malformed thread count logs a warning and uses the default."""
        with self.assertLogs("operformal", level="WARNING") as logs:
            config = EngineConfig()
        self.assertEqual(config.threads, DEFAULT_THREADS)
        self.assertTrue(any("OPERFORMAL_THREADS" in line for line in logs.output))

    @patch.dict(os.environ, {"OPERFORMAL_THREADS": "0"}, clear=True)
    def test_threads_non_positive(self):
        """Test a zero thread count is rejected."""
        with self.assertLogs("operformal", level="WARNING"):
            config = EngineConfig()
        self.assertEqual(config.threads, DEFAULT_THREADS)

    @patch.dict(os.environ, {"OPERFORMAL_THREADS": "  "}, clear=True)
    def test_threads_blank(self):
        """Test a blank value counts as unset."""
        self.assertEqual(EngineConfig().threads, DEFAULT_THREADS)

    @patch.dict(os.environ, {"OPERFORMAL_DENSE_THRESHOLD": "500"}, clear=True)
    def test_dense_threshold_from_environ(self):
        """Test the dense rref threshold is read from the environment."""
        self.assertEqual(EngineConfig().dense_threshold, 500)

    @patch.dict(os.environ, {"OPERFORMAL_THREADS": "3"}, clear=True)
    def test_pool_size(self):
        """Test pool() is sized by max_workers and maps in order."""
        config = EngineConfig()
        with config.pool() as pool:
            self.assertEqual(pool._max_workers, 3)
            self.assertEqual(list(pool.map(lambda x: x * x, range(6))), [0, 1, 4, 9, 16, 25])


if __name__ == '__main__':
    unittest.main()
