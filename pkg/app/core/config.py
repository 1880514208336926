"""
Core Configuration
Centralized solver settings using Pydantic BaseSettings
"""

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Solver settings loaded from environment variables"""

    # ==========================================
    # APPLICATION
    # ==========================================
    APP_NAME: str = "Octant VP Solver"
    APP_VERSION: str = "1.0.0"
    ENVIRONMENT: str = "development"
    DEBUG: bool = False
    LOG_LEVEL: str = "WARNING"

    # ==========================================
    # TOLERANCES
    # ==========================================
    MATRIX_RTOL: float = 1e-10  # matrix identities, symmetry, PD checks
    POSITION_ATOL: float = 1e-9  # Skorohod validation on positions
    RATE_ATOL: float = 1e-9  # Skorohod validation on rates
    REFLECTIVITY_TOL: float = 1e-12  # strict positivity margin for pushing rates
    BOUNDARY_TOL: float = 1e-9  # stability region boundaries

    # ==========================================
    # OPTIMIZER
    # ==========================================
    GOLDEN_TOL: float = 1e-10
    SCAN_POINTS: int = 64
    SPIRAL_SCAN_POINTS: int = 128
    GRID_POINTS: int = 32
    ZOOM_POINTS: int = 17
    ZOOM_ROUNDS: int = 40
    SPIRAL_TAIL_TOL: float = 1e-9
    SPIRAL_MAX_TURNS: int = 200

    # ==========================================
    # ORACLE
    # ==========================================
    ORACLE_SEED: int = 42
    ORACLE_SAMPLES: int = 10000
    ORACLE_EQUIVALENCE_SAMPLES: int = 1000
    ORACLE_GRID_RESOLUTION: int = 16
    ORACLE_TOLERANCE: float = 1e-6

    # ==========================================
    # SWEEP
    # ==========================================
    OCTANT_VP_THREADS: int = 1

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


# ==========================================
# SINGLETON INSTANCE
# ==========================================

settings = Settings()


# ==========================================
# DERIVED SETTINGS
# ==========================================

def worker_count() -> int:
    """Number of sweep workers, never below one"""
    return max(1, settings.OCTANT_VP_THREADS)


def is_production() -> bool:
    """Check if running in production"""
    return settings.ENVIRONMENT.lower() == "production"


def is_development() -> bool:
    """Check if running in development"""
    return settings.ENVIRONMENT.lower() == "development"


# ==========================================
# EXPORT
# ==========================================

__all__ = [
    "settings",
    "Settings",
    "worker_count",
    "is_production",
    "is_development"
]
