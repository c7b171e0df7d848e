import os
import logging
from dataclasses import dataclass, replace

from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class Settings:
    threads: int = 1
    chunk_size: int = 32768
    log_level: str = "WARNING"
    output_dir: str = "output"

    def with_threads(self, threads):
        if threads is None:
            return self
        return replace(self, threads=max(1, int(threads)))


def _env_int(name, default):
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ValueError(
            f"Cannot convert {name}='{raw}' (type: {type(raw).__name__}) to int: {e}"
        )


def load_settings():
    """Read the optional DESIGNS_* keys from the environment (and .env)."""
    return Settings(
        threads=max(1, _env_int("DESIGNS_THREADS", 1)),
        chunk_size=max(1, _env_int("DESIGNS_CHUNK_SIZE", 32768)),
        log_level=os.getenv("DESIGNS_LOG_LEVEL", "WARNING").upper(),
        output_dir=os.getenv("DESIGNS_OUTPUT_DIR", "output"),
    )


def configure_logging(settings):
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
