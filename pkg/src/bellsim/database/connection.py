import os

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker, scoped_session, declarative_base

from bellsim.core import SimConfig, echo

# Base class for models
Base = declarative_base()


class DatabaseManager:
    """Singleton holding the engine and session factory for measurement runs."""
    _instance = None
    _engine = None
    _session_factory = None
    _url = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(DatabaseManager, cls).__new__(cls)
        return cls._instance

    @property
    def ready(self) -> bool:
        return self._session_factory is not None

    def init_db(self, url: str = None):
        """Initialize database connection and tables"""
        url = url or SimConfig.DB_URL
        if not url:
            echo("⚠️ DB_URL not set in config. Skipping DB initialization.", force=True)
            return
        if self._engine is not None:
            if url == self._url:
                return
            echo(f"⚠️ DB 연결을 {self._url} 에서 {url} 로 바꿉니다.", force=True)
            self.close()

        if url.startswith("sqlite:///") and url != "sqlite:///:memory:":
            folder = os.path.dirname(url[len("sqlite:///"):])
            if folder:
                os.makedirs(folder, exist_ok=True)
        try:
            self._engine = create_engine(url, echo=False)
            Base.metadata.create_all(self._engine)
            self._session_factory = scoped_session(sessionmaker(bind=self._engine))
            self._url = url
            echo("✅ Database connected and initialized.")
        except Exception as e:
            self._engine = None
            echo(f"❌ Database connection failed: {e}", force=True)

    def get_session(self):
        """Get a new session"""
        if self._session_factory:
            return self._session_factory()
        return None

    def close(self):
        if self._session_factory is not None:
            self._session_factory.remove()
        if self._engine:
            self._engine.dispose()
        self._engine = None
        self._session_factory = None
        self._url = None


db_manager = DatabaseManager()
