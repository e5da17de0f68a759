"""Local HTTP service: pipeline endpoints, mock model backends, studio host."""

from .app import create_app

__all__ = ["create_app"]
