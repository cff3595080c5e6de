"""
Logger Setup
File: utils/utils_logger.py

Project-wide loguru logger for the polytrope toolkit.

Features:
- Logs run summaries, warnings, and errors to a rotating log file.
- Mirrors the same records to stderr (stdout is reserved for CLI payloads).
- Sanitizes messages so logs can be shared without personal paths.

Environment:
- POLYTROPE_LOG_DIR   folder for the log file (default: logs)
- POLYTROPE_LOG_LEVEL minimum level for both sinks (default: INFO)
"""

#####################################
# Import Modules
#####################################

# Imports from Python Standard Library
import getpass
import os
import pathlib
import sys
from typing import Any, Mapping

# Imports from external packages
from loguru import logger

#####################################
# Default Configurations
#####################################

CURRENT_SCRIPT = pathlib.Path(__file__).stem

LOG_FOLDER: pathlib.Path = pathlib.Path(os.getenv("POLYTROPE_LOG_DIR", "logs"))
LOG_FILE: pathlib.Path = LOG_FOLDER.joinpath("polytrope_log.log")
LOG_LEVEL: str = os.getenv("POLYTROPE_LOG_LEVEL", "INFO").upper()

#####################################
# Helper Functions
#####################################


def sanitize_message(record: Mapping[str, Any]) -> str:
    """Remove personal/identifying information from log messages and escape braces."""
    message = record["message"]

    try:
        current_user = getpass.getuser()
        message = message.replace(current_user, "USER")
    except Exception:
        pass

    try:
        message = message.replace(str(pathlib.Path.home()), "~")
    except Exception:
        pass

    try:
        message = message.replace(str(pathlib.Path.cwd()), "PROJECT_ROOT")
    except Exception:
        pass

    message = message.replace("\\", "/")

    # Loguru treats braces in a format string as fields
    return message.replace("{", "{{").replace("}", "}}")


def format_sanitized(record: Mapping[str, Any]) -> str:
    """Formatter producing 'time | level | message' lines from sanitized text."""
    message = sanitize_message(record)
    time_str = record["time"].strftime("%Y-%m-%d %H:%M:%S")
    level_name = record["level"].name
    return f"{time_str} | {level_name} | {message}\n"


try:
    LOG_FOLDER.mkdir(parents=True, exist_ok=True)
except Exception as e:
    sys.stderr.write(f"Error creating log folder: {e}\n")

try:
    logger.remove()
    logger.add(
        LOG_FILE,
        level=LOG_LEVEL,
        rotation="50 kB",
        retention=1,
        compression=None,
        enqueue=True,
        format=format_sanitized,
    )
    logger.add(
        sys.stderr,
        level=LOG_LEVEL,
        enqueue=True,
        format=format_sanitized,
    )
    logger.debug(f"Logging to file: {LOG_FILE}")
except Exception as e:
    logger.error(f"Error configuring logger to write to file: {e}")


#####################################
# Main Function for Testing
#####################################


def main() -> None:
    """Emit one record per level so the sinks can be inspected."""
    logger.info(f"STARTING {CURRENT_SCRIPT}.py")
    logger.info(f"Current working directory: {pathlib.Path.cwd()}")
    logger.warning("This is an example warning message.")
    logger.info(f"View the log output at {LOG_FILE}")
    logger.info(f"EXITING {CURRENT_SCRIPT}.py.")


#####################################
# Conditional Execution
#####################################

if __name__ == "__main__":
    main()
