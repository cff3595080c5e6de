"""
Config Utility
File: utils/utils_config.py

Configuration functions for the polytrope toolkit.

Settings are read from environment variables (a .env file in the project
root is loaded first) and fall back to the documented defaults. A key-value
file passed with `--config PATH` can override them for one run; command-line
flags override both.

If you rename any variables, remember to:
- update .env.example
- update the corresponding getter in this module
- update CONFIG_KEYS so config files accept the new key.
"""

#####################################
# Imports
#####################################

# import from Python Standard Library
import os
import pathlib
from typing import Any, Callable

# import from external packages
from dotenv import dotenv_values, load_dotenv

# import from local modules
from .utils_logger import logger

#####################################
# Load Environment Variables
#####################################

load_dotenv()

ENV_PREFIX = "POLYTROPE_"

#####################################
# Getter Functions for .env Variables
#####################################


def get_rtol() -> float:
    """Fetch POLYTROPE_RTOL (relative tolerance) from environment or use default."""
    rtol = float(os.getenv("POLYTROPE_RTOL", 1e-10))
    logger.debug(f"POLYTROPE_RTOL: {rtol}")
    return rtol


def get_atol() -> float:
    """Fetch POLYTROPE_ATOL (absolute tolerance) from environment or use default."""
    atol = float(os.getenv("POLYTROPE_ATOL", 1e-12))
    logger.debug(f"POLYTROPE_ATOL: {atol}")
    return atol


def get_r_switch() -> float:
    """Fetch POLYTROPE_R_SWITCH (series-to-integrator handoff radius)."""
    r_switch = float(os.getenv("POLYTROPE_R_SWITCH", 1e-3))
    logger.debug(f"POLYTROPE_R_SWITCH: {r_switch}")
    return r_switch


def get_r_max() -> float:
    """Fetch POLYTROPE_R_MAX (integration cap) from environment or use default."""
    r_max = float(os.getenv("POLYTROPE_R_MAX", 20.0))
    logger.debug(f"POLYTROPE_R_MAX: {r_max}")
    return r_max


def get_max_steps() -> int:
    """Fetch POLYTROPE_MAX_STEPS (step budget) from environment or use default."""
    max_steps = int(float(os.getenv("POLYTROPE_MAX_STEPS", 1_000_000)))
    logger.debug(f"POLYTROPE_MAX_STEPS: {max_steps}")
    return max_steps


def get_grid_spacing() -> float:
    """Fetch POLYTROPE_DR (output grid spacing for CSV trajectories)."""
    dr = float(os.getenv("POLYTROPE_DR", 0.01))
    logger.debug(f"POLYTROPE_DR: {dr}")
    return dr


def get_table_workers() -> int:
    """Fetch POLYTROPE_TABLE_WORKERS (parallel rows in `table`)."""
    workers = int(os.getenv("POLYTROPE_TABLE_WORKERS", 1))
    logger.debug(f"POLYTROPE_TABLE_WORKERS: {workers}")
    return workers


#####################################
# Key-Value Config Files
#####################################

REDUCED_FORMS = ("u", "y")


def parse_form(value: str) -> str:
    """Accept the reduced-form name `u` or `y` (any case)."""
    form = value.strip().lower()
    if form not in REDUCED_FORMS:
        raise ValueError(f"form must be one of {REDUCED_FORMS}, got {value!r}")
    return form


# Keys accepted in a --config file, with the converter for each value.
CONFIG_KEYS: dict[str, Callable[[str], Any]] = {
    "rtol": float,
    "atol": float,
    "r_switch": float,
    "r_max": float,
    "max_steps": lambda v: int(float(v)),
    "dr": float,
    "workers": int,
    "degree": int,
    "lambda": float,
    "form": parse_form,
    "n": str,
    "n_list": str,
}


def normalize_key(key: str) -> str:
    """Map 'R-MAX', 'r_max' and 'POLYTROPE_R_MAX' to the same key."""
    key = key.strip().upper().replace("-", "_")
    if key.startswith(ENV_PREFIX):
        key = key[len(ENV_PREFIX):]
    return key.lower()


def get_default_settings() -> dict[str, Any]:
    """Return the environment-backed defaults as one dict."""
    return {
        "rtol": get_rtol(),
        "atol": get_atol(),
        "r_switch": get_r_switch(),
        "r_max": get_r_max(),
        "max_steps": get_max_steps(),
        "dr": get_grid_spacing(),
        "workers": get_table_workers(),
    }


def load_config_file(path: pathlib.Path) -> dict[str, Any]:
    """
    Read a key-value config file (dotenv syntax) into typed settings.

    Args:
        path: file with lines like `rtol=1e-9` or `R_MAX=8`.

    Returns:
        dict of recognised settings; unknown or empty keys are skipped.

    Raises:
        FileNotFoundError: if the file does not exist.
        ValueError: if a recognised key holds an unparsable value.
    """
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")

    settings: dict[str, Any] = {}
    for raw_key, raw_value in dotenv_values(path).items():
        key = normalize_key(raw_key)
        if raw_value is None or raw_value == "":
            continue
        converter = CONFIG_KEYS.get(key)
        if converter is None:
            logger.warning(f"Ignoring unknown config key '{raw_key}' in {path}")
            continue
        try:
            settings[key] = converter(raw_value)
        except ValueError as e:
            raise ValueError(f"bad value for '{raw_key}' in {path}: {raw_value!r}") from e
    logger.info(f"Loaded {len(settings)} setting(s) from {path}")
    return settings


#####################################
# Conditional Execution
#####################################

if __name__ == "__main__":
    logger.info("Testing configuration.")
    try:
        for name, value in get_default_settings().items():
            logger.info(f"{name}: {value}")
        logger.info("SUCCESS: Configuration function tests complete.")
    except Exception as e:
        logger.error(f"ERROR: Configuration function test failed: {e}")
