from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache

import os


def get_app_env():
    app_env = os.getenv("APP_ENV", "dev")
    
    if (app_env == "prod"):
        return ".env.prod"
    else:
        return ".env"
     
class Settings(BaseSettings):
    APP_NAME:str = "CSK Constellation Designer"
    OUTPUT_DIR:str = "out"
    LOGGING_CONFIG:str = "logging.ini"
    LOG_LEVEL:str = "INFO"
    MAX_WORKERS:int = 1  # Hilos para reinicios / puntos de OSNR (1 = secuencial)
    DEFAULT_RESTARTS:int = 30
    DEFAULT_SEED:int = 2024
    DEFAULT_N_BITS:int = 300000
    BSA_RESTARTS:int = 10
    LABEL_OSNR_DB:float = 5.0
    SIM_CHUNK_SYMBOLS:int = 65536
    SCA_TOL:float = 1e-7
    SCA_MAX_ITER:int = 200
    HIST_RUNS:int = 200
    model_config = SettingsConfigDict(env_file=get_app_env(), extra="ignore")
        
@lru_cache()        
def get_settings() -> Settings:
    return Settings()
