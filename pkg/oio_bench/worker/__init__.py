"""Replication workers."""
from .pool import ReplicationPool
from .tasks import ReplicationResult, run_replication

__all__ = ["ReplicationPool", "ReplicationResult", "run_replication"]
