"""Resource snapshots around batch runs and worker-count defaults."""

import logging
import psutil
from datetime import datetime
from typing import Dict, Any, Optional
from dataclasses import dataclass
from enum import Enum


logger = logging.getLogger(__name__)


class ResourceStatus(Enum):
    """Memory pressure levels."""
    NORMAL = "normal"
    WARNING = "warning"
    CRITICAL = "critical"


@dataclass
class ResourceLimits:
    """System memory thresholds that trigger warnings before large batches."""
    memory_warning_percent: float = 85.0
    memory_critical_percent: float = 95.0


@dataclass
class ResourceSnapshot:
    """Process and system resource usage at one instant."""
    timestamp: datetime
    memory_mb: float
    memory_percent: float
    cpu_count: int
    logical_cpu_count: int

    @classmethod
    def capture(cls) -> 'ResourceSnapshot':
        """Read current usage; unreadable values fall back to zero."""
        try:
            memory_mb = psutil.Process().memory_info().rss / 1024 / 1024
        except (psutil.AccessDenied, psutil.NoSuchProcess):
            memory_mb = 0.0

        try:
            memory_percent = psutil.virtual_memory().percent
        except (OSError, RuntimeError):
            memory_percent = 0.0

        return cls(
            timestamp=datetime.utcnow(),
            memory_mb=memory_mb,
            memory_percent=memory_percent,
            cpu_count=psutil.cpu_count(logical=False) or 0,
            logical_cpu_count=psutil.cpu_count(logical=True) or 0
        )

    def status(self, limits: Optional[ResourceLimits] = None) -> ResourceStatus:
        limits = limits or ResourceLimits()
        if self.memory_percent >= limits.memory_critical_percent:
            return ResourceStatus.CRITICAL
        if self.memory_percent >= limits.memory_warning_percent:
            return ResourceStatus.WARNING
        return ResourceStatus.NORMAL

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for logging."""
        return {
            'timestamp': self.timestamp.isoformat(),
            'memory_mb': round(self.memory_mb, 1),
            'memory_percent': self.memory_percent,
            'cpu_count': self.cpu_count,
            'logical_cpu_count': self.logical_cpu_count
        }


def default_job_count() -> int:
    """Physical CPU count, falling back to logical CPUs, at least 1."""
    physical = psutil.cpu_count(logical=False)
    if physical:
        return physical
    return psutil.cpu_count(logical=True) or 1


def log_snapshot(label: str, limits: Optional[ResourceLimits] = None) -> ResourceSnapshot:
    """Capture a snapshot and log it, warning under memory pressure."""
    snapshot = ResourceSnapshot.capture()
    status = snapshot.status(limits)
    message = (f"{label}: rss={snapshot.memory_mb:.1f}MB system_memory={snapshot.memory_percent:.1f}% "
               f"cpus={snapshot.cpu_count}")
    if status == ResourceStatus.NORMAL:
        logger.debug(message)
    else:
        logger.warning(f"{message} ({status.value} memory pressure)")
    return snapshot
