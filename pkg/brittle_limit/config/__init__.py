import os
from dotenv import load_dotenv

load_dotenv()


def _env_int(name, default):
    value = os.environ.get(name)
    return int(value) if value not in (None, '') else default


def _env_float(name, default):
    value = os.environ.get(name)
    return float(value) if value not in (None, '') else default


class Config:
    # Runtime
    JOBS = _env_int('BRITTLE_LIMIT_JOBS', 1)
    LOG_LEVEL = os.environ.get('BRITTLE_LIMIT_LOG_LEVEL', 'INFO').upper()
    LOG_FILE = os.environ.get('BRITTLE_LIMIT_LOG_FILE') or None
    OUT_DIR = os.environ.get('BRITTLE_LIMIT_OUT_DIR') or 'results'
    DEFAULT_SEED = _env_int('BRITTLE_LIMIT_SEED', 20240101)

    # Densities
    IN_K_TOL = _env_float('BRITTLE_LIMIT_IN_K_TOL', 1e-12)
    DEVIATORIC_TOL = 1e-12
    CONV_M_SAMPLES = _env_int('BRITTLE_LIMIT_CONV_M_SAMPLES', 256)

    # Spectral algebra
    EIG_JACOBI_THRESHOLD = 1e-6  # on 1 - r^2 of the trigonometric method
    EIG_DEGENERATE_FLOOR = 1e-13

    # Envelopes
    THETA_GRID_POINTS = _env_int('BRITTLE_LIMIT_THETA_GRID_POINTS', 513)
    THETA_XATOL = 1e-12
    DUALITY_TOL = _env_float('BRITTLE_LIMIT_DUALITY_TOL', 1e-6)
    PRIMAL_GRID_POINTS = _env_int('BRITTLE_LIMIT_PRIMAL_GRID_POINTS', 64)
    PRIMAL_BOX_FACTOR = _env_float('BRITTLE_LIMIT_PRIMAL_BOX_FACTOR', 4.0)
    PRIMAL_SWEEPS = 60

    # Solver
    CG_TOL = _env_float('BRITTLE_LIMIT_CG_TOL', 1e-10)
    CG_MAX_ITERS = _env_int('BRITTLE_LIMIT_CG_MAX_ITERS', 20000)
    ALTERNATION_TOL = _env_float('BRITTLE_LIMIT_ALTERNATION_TOL', 1e-8)
    ALTERNATION_MAX_ITERS = _env_int('BRITTLE_LIMIT_ALTERNATION_MAX_ITERS', 50)
    RANDOM_DAMAGE_FRACTION = 0.05
    SEED_KEEP = _env_int('BRITTLE_LIMIT_SEED_KEEP', 3)
    SEED_SCREEN_CG_TOL = _env_float('BRITTLE_LIMIT_SEED_SCREEN_CG_TOL', 1e-6)
    HENCKY_UPPER_BRACKET = _env_float('BRITTLE_LIMIT_HENCKY_UPPER_BRACKET', 1.15)

    # Oracles
    ORACLE_MAX_GRID_POINTS = _env_int('BRITTLE_LIMIT_ORACLE_MAX_GRID_POINTS', 1_000_000)
    ORACLE_MAX_SAMPLES = _env_int('BRITTLE_LIMIT_ORACLE_MAX_SAMPLES', 10_000)
    ORACLE_SAMPLES = _env_int('BRITTLE_LIMIT_ORACLE_SAMPLES', 200)
    ORACLE_ACCEPTANCE_COUNTS = False

    # CSV
    FLOAT_FORMAT = '%.17g'


class DevelopmentConfig(Config):
    """Development configuration"""
    ORACLE_SAMPLES = 50


class VerifyConfig(Config):
    """Full oracle budgets for acceptance runs"""
    ORACLE_SAMPLES = Config.ORACLE_MAX_SAMPLES
    ORACLE_ACCEPTANCE_COUNTS = True


config = {
    'development': DevelopmentConfig,
    'verify': VerifyConfig,
    'default': Config
}
