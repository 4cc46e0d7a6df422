from .connection import db_manager, DatabaseManager
from .models import MeasureRun, record_run, input_digest
