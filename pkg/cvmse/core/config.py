from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime settings read from the environment or a `.env` file.

    Only the worker count is environment-driven; it never changes results.
    """

    THREADS: int = 1

    model_config = SettingsConfigDict(
        case_sensitive=True,
        env_file=".env",
        env_prefix="CVMSE_",
        extra="ignore",
    )


@lru_cache()
def get_settings():
    return Settings()


class Defaults:
    """Experiment defaults; a `--config` key=value file overrides these"""

    # Enumeration
    ENUM_BUDGET = 2 ** 24          # weighted terms |support|^n * mixture size

    # Monte Carlo
    SEED = 20240607
    TRIALS = 100_000
    MC_CHUNK = 4096                # trials per work unit, fixed so results ignore THREADS

    # Majority
    EXACT_CROSSOVER_N = 10_000     # exact big-integer rows up to this n

    # Linear functions over F_q
    ENVELOPE_CONSTANT = 4          # calibrated at q=2 against exact rank probabilities

    # Square wave
    SQ_KAPPA = 1.0                 # coefficient of the m^{-3/2} remainder
    THETA_TERMS = 6                # tail below 1e-10

    # Artifacts
    OUTPUT_DIR = "results"

    @classmethod
    def as_dict(cls):
        return {
            name: getattr(cls, name)
            for name in dir(cls)
            if name.isupper()
        }
