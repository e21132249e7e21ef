from dotenv import dotenv_values

# Load environment variables from .env file
config = dotenv_values(".env")

DEBUG=config.get("DEBUG", "False").lower() == "true"

LOG_LEVEL=config.get("LOG_LEVEL", "INFO").upper()

# Covariance entries above this value halt an integration (dimensionless units)
OVERFLOW_LIMIT=float(config.get("OVERFLOW_LIMIT", "1e12"))
if OVERFLOW_LIMIT <= 0:
    raise ValueError("OVERFLOW_LIMIT must be positive.")

PHYSICALITY_TOL=float(config.get("PHYSICALITY_TOL", "1e-9"))
if PHYSICALITY_TOL < 0:
    raise ValueError("PHYSICALITY_TOL must be non-negative.")

OUTPUT_DIR=config.get("OUTPUT_DIR", "results")

SWEEP_WORKERS=int(config.get("SWEEP_WORKERS", "1"))
if SWEEP_WORKERS < 1:
    raise ValueError("SWEEP_WORKERS must be at least 1.")
