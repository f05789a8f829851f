"""Configuration module for fstirap-cavity."""
from .settings import settings, Settings

__all__ = ["settings", "Settings"]
