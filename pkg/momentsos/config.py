"""
Configuration - Settings read from the environment
"""
import os
from dataclasses import dataclass

from momentsos.errors import ConfigError

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']


@dataclass(frozen=True)
class Settings:
    """Runtime defaults for the solver, extraction and the command line."""

    solver_tol: float = 1e-8
    max_iter: int = 200
    max_entries: int = 4_000_000
    rank_tol: float = 1e-8
    seed: int = 0
    log_level: str = 'WARNING'
    threads: int = 1

    def to_dict(self):
        """Convert settings to dictionary for reports."""
        return {
            'solver_tol': self.solver_tol,
            'max_iter': self.max_iter,
            'max_entries': self.max_entries,
            'rank_tol': self.rank_tol,
            'seed': self.seed,
            'log_level': self.log_level,
            'threads': self.threads,
        }


def _read(name, default, cast):
    raw = os.environ.get(name)
    if raw is None or raw == '':
        return default
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f'{name} has invalid value {raw!r}')


def load_settings():
    """Build settings from MOMENTSOS_* environment variables."""
    settings = Settings(
        solver_tol=_read('MOMENTSOS_SOLVER_TOL', 1e-8, float),
        max_iter=_read('MOMENTSOS_MAX_ITER', 200, int),
        max_entries=_read('MOMENTSOS_MAX_ENTRIES', 4_000_000, int),
        rank_tol=_read('MOMENTSOS_RANK_TOL', 1e-8, float),
        seed=_read('MOMENTSOS_SEED', 0, int),
        log_level=_read('MOMENTSOS_LOG_LEVEL', 'WARNING', str).upper(),
        threads=_read('MOMENTSOS_THREADS', 1, int),
    )
    if settings.solver_tol <= 0 or settings.rank_tol <= 0:
        raise ConfigError('tolerances must be positive')
    if settings.max_iter < 1 or settings.threads < 1:
        raise ConfigError('MOMENTSOS_MAX_ITER and MOMENTSOS_THREADS must be >= 1')
    if settings.log_level not in LOG_LEVELS:
        raise ConfigError(f'MOMENTSOS_LOG_LEVEL must be one of {LOG_LEVELS}')
    return settings
