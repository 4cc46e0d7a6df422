# src/bellsim/cli/__init__.py

from .main import main
