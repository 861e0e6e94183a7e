import os
from dotenv import load_dotenv

load_dotenv()


class Settings:
    """
    Process-wide settings, read once from the environment (and a .env file if present).
    """
    LOG_TARGET: str = os.getenv("CFNOMA_LOG_TARGET", "console")
    LOG_LEVEL: str = os.getenv("CFNOMA_LOG_LEVEL", "INFO")
    LOGGER_FOLDER: str = os.getenv("CFNOMA_LOG_DIR", os.path.join(os.getcwd(), "logs"))

    NOISE_DBM: float = float(os.getenv("CFNOMA_NOISE_DBM", "-104"))
    WORKERS: int = int(os.getenv("CFNOMA_WORKERS", "1"))

    SOLVER_TOL: float = float(os.getenv("CFNOMA_SOLVER_TOL", "1e-8"))
    SOLVER_RELTOL: float = float(os.getenv("CFNOMA_SOLVER_RELTOL", "1e-7"))
    SOLVER_MAX_ITERS: int = int(os.getenv("CFNOMA_SOLVER_MAX_ITERS", "100"))
    IA_EPSILON: float = float(os.getenv("CFNOMA_IA_EPSILON", "1e-3"))
    IA_MAX_OUTER: int = int(os.getenv("CFNOMA_IA_MAX_OUTER", "30"))

    MC_BLOCK: int = int(os.getenv("CFNOMA_MC_BLOCK", "500"))      # realizations per Monte Carlo block


settings = Settings()
