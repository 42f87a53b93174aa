"""
Environment-driven settings (dotenv) and logging setup
"""
import logging
import os
from dataclasses import dataclass

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass(frozen=True)
class Settings:
    """Process-wide settings read from the environment"""
    num_threads: int
    output_dir: str
    log_level: str


def get_settings() -> Settings:
    """Read settings from the environment (re-read on every call so tests can monkeypatch)"""
    raw_threads = os.getenv("RENDEZVOUS_NUM_THREADS")
    try:
        num_threads = max(1, int(raw_threads)) if raw_threads else (os.cpu_count() or 1)
    except ValueError:
        num_threads = 1
    return Settings(
        num_threads=num_threads,
        output_dir=os.getenv("RENDEZVOUS_OUTPUT_DIR", "runs"),
        log_level=os.getenv("RENDEZVOUS_LOG_LEVEL", "INFO").upper(),
    )


def configure_logging(level: str = None) -> None:
    """Configure root logging once for the CLI and the service"""
    level = (level or get_settings().log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)
