import logging

from cvmse.core.config import Defaults, get_settings
from cvmse.core.logging import setup_logging


class TestSettings:
    def test_threads_default(self):
        assert get_settings().THREADS == 1

    def test_threads_from_environment(self, monkeypatch):
        monkeypatch.setenv("CVMSE_THREADS", "4")
        get_settings.cache_clear()
        assert get_settings().THREADS == 4

    def test_settings_are_cached(self):
        assert get_settings() is get_settings()


class TestDefaults:
    def test_as_dict(self):
        values = Defaults.as_dict()
        assert values["ENUM_BUDGET"] == 2 ** 24
        assert values["ENVELOPE_CONSTANT"] == 4
        assert values["THETA_TERMS"] == 6
        assert "as_dict" not in values


class TestLogging:
    def test_single_handler(self):
        logger = setup_logging("DEBUG")
        setup_logging("INFO")
        marked = [h for h in logger.handlers if getattr(h, "_cvmse", False)]
        assert len(marked) == 1
        assert logger.level == logging.INFO
