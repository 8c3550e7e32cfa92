import logging

import pytest

from lattice_rewrite import logging_config
from lattice_rewrite.logging_config import set_log_level, setup_logging


@pytest.mark.skipif(logging_config.LOGS_PATH is not None, reason="file logging enabled in env")
def test_no_log_files_by_default():
    setup_logging()
    handlers = logging.getLogger().handlers
    assert not any(isinstance(h, logging.FileHandler) for h in handlers)


def test_set_log_level():
    set_log_level("debug")
    assert logging.getLogger("lattice_rewrite").level == logging.DEBUG
    set_log_level("WARNING")
    assert logging.getLogger("lattice_rewrite").level == logging.WARNING
    with pytest.raises(ValueError):
        set_log_level("loud")
