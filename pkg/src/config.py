"""
Configuration settings for the SBC concentration toolkit
"""
import os
from pathlib import Path
from typing import Dict, Any
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _flag(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ("true", "1", "t", "yes")


class Config:
    """Runtime settings for simulation, estimation and logging"""

    # Logging
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    LOG_DIR = Path(os.getenv("LOG_DIR", "./logs"))
    LOG_TO_FILE = _flag("LOG_TO_FILE", "True")

    # Output
    OUTPUT_DIR = Path(os.getenv("OUTPUT_DIR", "./results"))

    # Monte Carlo engine
    MC_WORKERS = int(os.getenv("MC_WORKERS", "1"))
    MC_CHUNK_SIZE = int(os.getenv("MC_CHUNK_SIZE", "2048"))
    MC_CONFIDENCE = float(os.getenv("MC_CONFIDENCE", "0.99"))
    MC_BATCHES = int(os.getenv("MC_BATCHES", "20"))

    # Exact oracle
    ORACLE_MAX_STATES = int(os.getenv("ORACLE_MAX_STATES", "5000000"))
    ORACLE_PRUNE_THRESHOLD = float(os.getenv("ORACLE_PRUNE_THRESHOLD", "1e-18"))
    ORACLE_PRUNED_MASS_BUDGET = float(os.getenv("ORACLE_PRUNED_MASS_BUDGET", "1e-9"))

    # Largest horizon considered reachable by simulation
    DESK_SCALE_MAX_T = float(os.getenv("DESK_SCALE_MAX_T", "1e7"))

    # Figure reproduction
    FIGURE_SAMPLES = int(os.getenv("FIGURE_SAMPLES", "10000"))
    FIGURE_HORIZON = int(os.getenv("FIGURE_HORIZON", "400"))
    FIGURE_SVG = _flag("FIGURE_SVG", "True")

    # Paths
    BASE_DIR = Path(__file__).parent.parent.absolute()

    @classmethod
    def to_dict(cls) -> Dict[str, Any]:
        """
        Convert configuration to dictionary

        Returns:
            Dict[str, Any]: Configuration as dictionary
        """
        return {
            key: value for key, value in cls.__dict__.items()
            if key.isupper() and not callable(value)
        }

    @classmethod
    def get(cls, key: str, default: Any = None) -> Any:
        """
        Get configuration value

        Args:
            key: Configuration key
            default: Default value if key doesn't exist

        Returns:
            Any: Configuration value
        """
        return getattr(cls, key, default)
