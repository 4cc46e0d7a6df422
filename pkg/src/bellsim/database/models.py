import hashlib
import json
from datetime import datetime

from sqlalchemy import Column, Integer, String, Float, Boolean, DateTime, JSON

from .connection import Base, db_manager


class MeasureRun(Base):
    __tablename__ = 'measure_runs'

    id = Column(Integer, primary_key=True)
    kind = Column(String, nullable=False)          # e.g. "rel-ent", "min-ext", "is-local"
    input_hash = Column(String(64), index=True)    # sha256 of the canonical input JSON

    value = Column(Float, nullable=True)
    gap = Column(Float, nullable=True)
    iterations = Column(Integer, nullable=True)
    converged = Column(Boolean, nullable=True)

    payload = Column(JSON)                         # full CLI result document
    created_at = Column(DateTime, default=datetime.utcnow)


def input_digest(document) -> str:
    text = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def record_run(kind: str, input_document, result: dict):
    """
    Store one measurement result. Does nothing when the database is not initialized.

    :param result: JSON-ready result dict (value / gap / iterations / converged are lifted into columns)
    :return: the stored MeasureRun id, or None
    """
    session = db_manager.get_session()
    if session is None:
        return None
    run = MeasureRun(
        kind=kind,
        input_hash=input_digest(input_document),
        value=_as_float(result.get("value")),
        gap=_as_float(result.get("gap")),
        iterations=result.get("iterations"),
        converged=result.get("converged"),
        payload=result,
    )
    try:
        session.add(run)
        session.commit()
        return run.id
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def _as_float(v):
    if v is None:
        return None
    try:
        return float(v)
    except (TypeError, ValueError):
        return None
