from sqlalchemy import create_engine, text
from sqlalchemy.orm import sessionmaker
from pydantic_settings import BaseSettings
from dotenv import load_dotenv
from functools import lru_cache
import os
from pathlib import Path

from utilities import log

# Get the parent directory where .env file is located
parent_dir = Path(__file__).parent.parent
load_dotenv(parent_dir / ".env")

class Settings(BaseSettings):
    output_dir: str = os.getenv("ROUGHSLIP_OUTPUT_DIR", "./runs")
    database_name: str = "runs.db"

    class Config:
        env_file = parent_dir / ".env"  # Look for .env in parent directory
        env_prefix = "ROUGHSLIP_"
        extra = "ignore"

settings = Settings()


def database_url(output_dir: str | None = None) -> str:
    folder = Path(output_dir or settings.output_dir)
    folder.mkdir(parents=True, exist_ok=True)
    return f"sqlite:///{(folder / settings.database_name).as_posix()}"


@lru_cache(maxsize=8)
def get_engine(output_dir: str | None = None):
    # SQLite only; one file per output directory
    url = database_url(output_dir)
    log.debug(f"Run database: {url}")
    engine = create_engine(url)
    from database.models import Base
    Base.metadata.create_all(bind=engine)
    return engine


def get_session_factory(output_dir: str | None = None):
    return sessionmaker(autocommit=False, autoflush=False, bind=get_engine(output_dir))


def get_db(output_dir: str | None = None):
    """Session generator with one connection retry"""
    SessionLocal = get_session_factory(output_dir)
    db = SessionLocal()
    try:
        # Test the connection
        db.execute(text("SELECT 1"))
        yield db
    except Exception:
        db.close()
        # Retry once with a new connection
        db = SessionLocal()
        db.execute(text("SELECT 1"))
        yield db
    finally:
        db.close()
