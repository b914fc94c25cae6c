import logging
import sys

from pydantic_settings import BaseSettings
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    threads: int = 1
    seed: int = 0x5EED
    mc_samples: int = 1_000_000
    truncation: int = 64
    radial_order: int = 48
    angular_order: int = 64
    origin_levels: int = 6
    edge_levels: int = 6
    refinement_levels: int = 3
    output_dir: str = "data"
    log_level: str = "INFO"

    class Config:
        env_prefix = 'BERGMAN_'
        env_file = '.env'
        env_file_encoding = 'utf-8'
        extra = 'ignore'  # Ignore extra fields from .env


settings = Settings()


def configure_logging(level: str | None = None) -> None:
    """Route library logging to stderr, the diagnostic stream."""
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
