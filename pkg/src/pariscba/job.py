"""Job base classes: the generic Job, Monte Carlo draw batches and CLI commands."""

import asyncio
import logging
import traceback
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Optional
from uuid import uuid4

from .models import JOB_STATES, RunConfig

logger = logging.getLogger(__name__)


@dataclass
class Job:
    """Generic job base class"""

    job_id: str = field(default_factory=lambda: str(uuid4()))
    status: JOB_STATES = "queued"
    results: Optional[Any] = None
    heading: Optional[str] = None

    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None

    semaphore_name: str = "default"

    # Error tracking fields
    error_message: Optional[str] = None
    error_type: Optional[str] = None
    error_traceback: Optional[str] = None

    def capture_error(self, exception: Exception):
        """Capture detailed error information from an exception."""
        self.error_type = type(exception).__name__
        self.error_message = str(exception)
        self.error_traceback = "".join(
            traceback.format_exception(
                type(exception), exception, exception.__traceback__
            )
        )
        self.status = "failed"

    @property
    def label(self) -> str:
        return self.heading or f"{type(self).__name__} {self.job_id}"

    async def execute(self):
        """Run ``run()`` in a worker thread.

        The return value of ``run()`` becomes ``results``. Exceptions are
        captured on the job and re-raised.
        """
        self.status = "running"
        self.started_at = datetime.now()
        try:
            self.results = await asyncio.to_thread(self.run)
        except Exception as e:
            self.capture_error(e)
            raise
        finally:
            self.completed_at = datetime.now()
        self.status = "done"
        logger.debug(
            "%s done in %.3f s", self.label, (self.completed_at - self.started_at).total_seconds()
        )

    def run(self):
        """Synchronous function that does the actual work"""
        raise NotImplementedError("Subclasses must implement run()")


@dataclass
class DrawBatchJob(Job):
    """Evaluate Monte Carlo draws ``start`` to ``stop`` (exclusive).

    ``evaluate(start, stop)`` must depend only on the draw indices, so the
    batch layout never changes the results.
    """

    start: int = 0
    stop: int = 0
    evaluate: Optional[Callable[[int, int], Any]] = None
    semaphore_name: str = "multiple"

    def run(self):
        self.heading = f"draws {self.start}-{self.stop - 1}"
        if self.evaluate is None:
            raise ValueError("DrawBatchJob needs an evaluate callable")
        result = self.evaluate(self.start, self.stop)
        logger.info("finished draws %d-%d", self.start, self.stop - 1)
        return result


@dataclass
class Command(Job):
    """Base class for CLI subcommands.

    ``run()`` writes its outputs under ``config.output_dir`` and returns
    the paths it wrote.
    """

    config: RunConfig = field(default_factory=RunConfig)
    semaphore_name: str = "single"

    def output_path(self, filename: str) -> Path:
        self.config.output_dir.mkdir(parents=True, exist_ok=True)
        return self.config.output_dir / filename
