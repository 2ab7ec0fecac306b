import os

import pyfairmod.logger as LOGGER


def test_logging_is_off_by_default(tmp_path):
    LOGGER.set_log_file_path(None)
    LOGGER.toggle_logging()
    assert not LOGGER.is_enabled()
    LOGGER.write('dropped')


def test_toggle_creates_log_directory(tmp_path):
    log_path = str(tmp_path / 'logs' / 'run.log')
    LOGGER.set_log_file_path(log_path)
    LOGGER.toggle_logging()
    try:
        assert LOGGER.is_enabled()
        LOGGER.write('first line')
        LOGGER.write('second line', no_timestamp=True)
    finally:
        LOGGER.close_logger()
        LOGGER.set_log_file_path(None)
    assert not LOGGER.is_enabled()
    with open(log_path, 'r') as fp:
        lines = fp.read().splitlines()
    assert lines[0].endswith(' - first line')
    assert lines[1] == 'second line'


def test_default_log_file_path():
    path = LOGGER.default_log_file_path()
    assert os.path.dirname(path) == '.pyfairmod'
    assert path.endswith('.log')
