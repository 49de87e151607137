"""Configuration management using environment variables."""

import os
from typing import Optional
from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Config:
    """Process-level settings read from FUZZFORGE_* environment variables."""

    def __init__(self):
        """Initialize configuration from environment variables."""
        jobs = os.getenv("FUZZFORGE_JOBS")
        self.jobs = int(jobs) if jobs else self._default_jobs()
        self.log_level = os.getenv("FUZZFORGE_LOG_LEVEL", "INFO").upper()
        self.log_dir: Optional[str] = os.getenv("FUZZFORGE_LOG_DIR") or None
        self.root = os.getenv("FUZZFORGE_ROOT", ".")

    @staticmethod
    def _default_jobs() -> int:
        """Physical CPU count, or 1 when it cannot be determined."""
        from src.services.resource_monitor import default_job_count
        return default_job_count()

    def validate(self) -> bool:
        """Validate configuration settings."""
        try:
            if self.jobs < 1:
                raise ValueError("FUZZFORGE_JOBS must be at least 1")

            if self.log_level not in LOG_LEVELS:
                raise ValueError(f"FUZZFORGE_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")

            if not self.root:
                raise ValueError("FUZZFORGE_ROOT must not be empty")

            return True

        except ValueError as e:
            raise ValueError(f"Configuration validation failed: {e}")


# Global configuration instance (lazy-loaded)
_config = None

def get_config() -> Config:
    """Get the global configuration instance."""
    global _config
    if _config is None:
        _config = Config()
    return _config


def reset_config() -> None:
    """Forget the cached configuration so the environment is read again."""
    global _config
    _config = None
