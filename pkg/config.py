# Configuration file for the loop subgroup stabilizer toolkit
import os

from dotenv import load_dotenv

load_dotenv()


def _env_int(name: str, default: int) -> int:
    """Read an integer override from the environment (LOOPSTAB_<name>)"""
    value = os.getenv(f"LOOPSTAB_{name}")
    if value is None or value.strip() == "":
        return default
    return int(value)


# Closure Enumeration Configuration
CLOSURE_CAP = _env_int("CLOSURE_CAP", 10_000_000)  # GL_5(Z/2) is ~9.9M elements

# Exhaustive GL_r(Z/l) enumeration is only done when l^(r*r) <= 2^BRUTE_FORCE_MAX_ENTRIES
BRUTE_FORCE_MAX_ENTRIES = _env_int("BRUTE_FORCE_MAX_ENTRIES", 18)

# Randomized checks
RANDOM_SEED = _env_int("RANDOM_SEED", 20240601)
UPPER_BOUND_TRIALS = _env_int("UPPER_BOUND_TRIALS", 500)
UPPER_BOUND_MAX_LENGTH = _env_int("UPPER_BOUND_MAX_LENGTH", 10)
PRODUCT_SYLLABLE_BUDGET = _env_int("PRODUCT_SYLLABLE_BUDGET", 1000)  # summed over all generator images
GAMMA_S1_TRIALS = _env_int("GAMMA_S1_TRIALS", 100)
GAMMA_S1_MAX_LENGTH = _env_int("GAMMA_S1_MAX_LENGTH", 8)

# Excluded case: closure mod 2*s1 is only attempted up to this modulus
LEVEL_CHECK_MAX_MODULUS = _env_int("LEVEL_CHECK_MAX_MODULUS", 4)

# Default ranks for the sharp bound verification (enumeration sizes 168 / 20160)
SHARPBOUND_RANKS = (3, 4)
SHARPBOUND_EXTENDED_RANKS = (3, 4, 5)  # r = 5 needs an explicit --cap >= |GL_5(Z/2)|

# Reports
REPORT_SCHEMA_VERSION = 1
DEFAULT_REPORT_DIR = "reports"

# Logging
LOG_LEVEL = os.getenv("LOOPSTAB_LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Generator names used when printing words for r <= 3
SMALL_RANK_GENERATOR_NAMES = ("x", "y", "z")
