"""Module containing logging functions.

The logger is controlled via a set of global variables set by the pyfairmod command line client.
Simulation, auction and command modules call write(), which is a no-op unless logging was toggled on.
"""

import os
import datetime

# Global var that stores path to logfile
_LOG_FILE_PATH = None

# Global var that stores whether or not logging is enabled
_LOG_ENABLED = False

# Global var that stores file pointer for log file
_LOG_FILE_POINTER = None


def default_log_file_path():
    """Gets the default log file path, one file per day under .pyfairmod

    Returns
    -------
    log_file_path : str
        Path of the form .pyfairmod/YYYY-MM-DD.log
    """

    return os.path.join('.pyfairmod', '{}.log'.format(datetime.date.today().isoformat()))


def toggle_logging():
    """Function for opening/closing log file as required.

    The parent directory of the log file is created if it does not exist yet.
    """

    global _LOG_ENABLED
    global _LOG_FILE_PATH
    if _LOG_FILE_PATH is None and not _LOG_ENABLED:
        return
    if _LOG_ENABLED:
        close_logger()
        _LOG_ENABLED = False
        return
    log_dir = os.path.dirname(os.path.abspath(_LOG_FILE_PATH))
    if not os.path.exists(log_dir):
        try:
            os.makedirs(log_dir)
        except OSError:
            return
    if os.access(log_dir, os.W_OK):
        _LOG_ENABLED = initialize_logger()


def set_log_file_path(log_file_path):
    """Sets the path to the log file

    Parameters
    ----------
    log_file_path : str
        Path to the log file
    """

    global _LOG_FILE_PATH
    _LOG_FILE_PATH = log_file_path


def is_enabled():
    """Checks if log writing is currently active

    Returns
    -------
    enabled : bool
        True if write() will reach a file
    """

    return _LOG_ENABLED and _LOG_FILE_POINTER is not None


def initialize_logger():
    """Function for initializing log-file writing

    Returns
    -------
    initialized : bool
        True if log file opened, false otherwise
    """

    global _LOG_FILE_PATH
    global _LOG_FILE_POINTER
    if os.path.exists(_LOG_FILE_PATH):
        if not os.access(_LOG_FILE_PATH, os.W_OK):
            return False
    _LOG_FILE_POINTER = open(_LOG_FILE_PATH, 'a+')
    return True


def close_logger():
    """Function that closes the opened logfile
    """

    global _LOG_FILE_POINTER
    global _LOG_ENABLED
    if _LOG_FILE_POINTER is not None:
        _LOG_FILE_POINTER.close()
        _LOG_FILE_POINTER = None
    _LOG_ENABLED = False


def write(text, no_timestamp=False):
    """Main logging funcion.

    Parameters
    ----------
    text : str
        debug text to print
    no_timestamp=False : bool
        a flag to disable timestamp printing when required
    """

    global _LOG_FILE_POINTER
    global _LOG_ENABLED
    if _LOG_ENABLED and _LOG_FILE_POINTER is not None:

        if no_timestamp:
            final_text = '{}\n'.format(text)
        else:
            final_text = '{} - {}\n'.format(datetime.datetime.now(), text)

        _LOG_FILE_POINTER.write(final_text)
        _LOG_FILE_POINTER.flush()
