from pydantic_settings import BaseSettings

class Settings(BaseSettings):
    log_level: str = "INFO"
    log_file: str = "logs/shelldrag.log"  # empty string disables the file sink
    output_dir: str = "out"

    # Runs
    seed: int = 0
    max_workers: int = 4
    gravity: float = 9.81

    class Config:
        env_file = ".env"
        env_prefix = "SHELLDRAG_"
        extra = "ignore"

settings = Settings()
