"""Core configuration, logging and validated schemas."""
