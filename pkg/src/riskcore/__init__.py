"""Risk-factor based cancer prediction pipeline on questionnaire data."""

__version__ = "0.1.0"
