import os
import json
import logging
from pathlib import Path

import yaml
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Configure logging
log_level = os.getenv("LOG_LEVEL", "INFO").upper()
VALID_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR"}

if log_level not in VALID_LOG_LEVELS:
    print(f"Invalid LOG_LEVEL: {log_level}. Defaulting to INFO")
    log_level = "INFO"

logging.basicConfig(
    level=getattr(logging, log_level),
    format="%(asctime)s - %(levelname)s - %(message)s",
)

# Tolerances shared by every verdict. Exact algebraic identities use NORM_TOL,
# anything that goes through an eigendecomposition uses EIGEN_TOL.
NORM_TOL = 1e-12
EIGEN_TOL = 1e-10
PURITY_TOL = 1e-10
ENTROPY_TOL_BITS = 1e-8

DEFAULT_DETUNING_EXPONENT = 3.0

# Exhaustive answer enumeration is 2^n runs per n.
EXHAUSTIVE_MAX_N = 12

CLAIMS_FILE = Path(__file__).parent / "claims.yaml"

# Environment variables that override the user defaults file
ENV_OVERRIDES = {
    "QSEARCH_SEED": ("seed", int),
    "QSEARCH_DETUNING_EXPONENT": ("detuning_exponent", float),
    "QSEARCH_TOL_PURITY": ("tol_purity", float),
}


# Configuration handling
def get_config_dir():
    """Get the configuration directory for qsearch."""
    if os.name == 'nt':  # Windows
        config_dir = Path(os.environ.get('APPDATA', '~')) / 'qsearch'
    else:  # Unix-like
        config_dir = Path('~/.config/qsearch').expanduser()
    return config_dir


def get_config_file():
    """Get the configuration file path."""
    return get_config_dir() / 'config.json'


def read_config_file():
    """User defaults as stored on disk, without environment overrides."""
    config_file = get_config_file()
    if config_file.exists():
        try:
            with open(config_file) as f:
                return json.load(f)
        except Exception as e:
            logging.warning(f"Error loading config file: {e}")
    return {}


def load_config():
    """Load user defaults for experiments.

    The JSON defaults file is read first; environment variables take precedence.
    """
    config = read_config_file()

    for env_name, (key, cast) in ENV_OVERRIDES.items():
        raw = os.getenv(env_name)
        if raw is None:
            continue
        try:
            config[key] = cast(raw)
        except ValueError:
            logging.warning(f"Ignoring {env_name}={raw!r}: not a valid {cast.__name__}")

    return config


def save_config(config):
    """Save user defaults to file."""
    config_dir = get_config_dir()
    config_file = get_config_file()

    try:
        config_dir.mkdir(parents=True, exist_ok=True)
        with open(config_file, 'w') as f:
            json.dump(config, f, indent=2)
    except Exception as e:
        logging.error(f"Error saving config file: {e}")
        raise


def load_claims(path: Path = CLAIMS_FILE) -> dict:
    """Load the claims registry, keyed by claim id.

    Each entry carries the verbatim anchor phrase, a description of the expected
    value and the numeric bound the check compares against.
    """
    with open(path, encoding="utf-8") as f:
        entries = yaml.safe_load(f)["claims"]
    claims = {}
    for entry in entries:
        if entry["id"] in claims:
            raise ValueError(f"Duplicate claim id in registry: {entry['id']}")
        claims[entry["id"]] = entry
    anchors = [entry["anchor"] for entry in entries]
    if len(set(anchors)) != len(anchors):
        raise ValueError("Claim anchors must map 1:1 to claim ids")
    return claims
