"""HTTP API serving the teacher console and scripted clients."""

from .app import ApprovalBody, JobView, create_app

__all__ = ["ApprovalBody", "JobView", "create_app"]
