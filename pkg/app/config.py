from typing import Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", case_sensitive=True
    )

    # 應用設定
    APP_NAME: str = "MACWT_Secrecy_Toolkit"
    APP_ENV: str = "development"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # 通道與互資訊設定
    MAX_USERS: int = 4
    RATIONAL_DENOMINATOR: int = 10**12
    MI_TOLERANCE: float = 1e-9
    PROBABILITY_TOLERANCE: float = 1e-12

    # 多面體設定
    MAX_POLYTOPE_DIM: int = 6
    CONTAINMENT_TOLERANCE: float = 1e-9
    MAX_HULL_CANDIDATES: int = 2_000_000

    # 模擬設定
    MAX_BLOCKLENGTH: int = 10
    MAX_ALPHABET: int = 4
    MAX_CODEBOOK_PAIRS: int = 2**16
    MAX_LEAKAGE_ATOMS: int = 10**7
    MAX_TYPICALITY_ENUMERATION: int = 2**20
    DEFAULT_TYPICALITY_EPS: float = 1.0
    N_STATISTIC_SAMPLES: int = 200

    # 執行設定
    WORKERS: int = 1
    FLOAT_DIGITS: int = 12
    OUTPUT_DIR: Optional[str] = None

    @field_validator("LOG_LEVEL")
    @classmethod
    def normalize_log_level(cls, v: str) -> str:
        return v.upper()

    @field_validator("RATIONAL_DENOMINATOR", "MAX_USERS", "MAX_POLYTOPE_DIM", "WORKERS")
    @classmethod
    def positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("必須為正整數")
        return v


settings = Settings()
