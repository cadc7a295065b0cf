"""Job queue and execution"""

import asyncio
import logging
from typing import List, Optional, Sequence

from .exceptions import JobFailedError
from .job import Job

logger = logging.getLogger(__name__)


class JobManager:
    """Manages a job queue drained by a pool of async workers.

    Each job acquires the semaphore named by its ``semaphore_name`` before
    it runs, which bounds how many jobs of a kind execute at once.
    """

    def __init__(self, max_workers: int = 4, multiple_limit: Optional[int] = None):
        self.job_queue: asyncio.Queue = asyncio.Queue()
        self._worker_tasks: List[asyncio.Task] = []
        self.max_workers = max_workers

        self.semaphores = {
            "single": asyncio.Semaphore(1),  # one job at a time
            "multiple": asyncio.Semaphore(multiple_limit or max_workers),
            "default": asyncio.Semaphore(3),
        }

    async def start(self):
        """Start the worker loops"""
        if not self._worker_tasks:
            for i in range(self.max_workers):
                worker = asyncio.create_task(self._worker_loop(f"worker-{i}"))
                self._worker_tasks.append(worker)

    async def stop(self):
        """Stop the worker loops"""
        for worker in self._worker_tasks:
            worker.cancel()
        await asyncio.gather(*self._worker_tasks, return_exceptions=True)
        self._worker_tasks.clear()

    async def _worker_loop(self, worker_id: str):
        """Background worker that processes jobs"""
        while True:
            try:
                job: Job = await self.job_queue.get()
            except asyncio.CancelledError:
                break

            semaphore = self.semaphores.get(job.semaphore_name, self.semaphores["default"])
            try:
                async with semaphore:
                    logger.debug("%s picked up %s", worker_id, job.label)
                    try:
                        await job.execute()
                    except Exception as e:
                        # execute() normally captured this already
                        if not job.error_message:
                            job.capture_error(e)
                        logger.error("%s failed: %s", job.label, job.error_message)
            finally:
                self.job_queue.task_done()

    async def add_job_to_queue(self, job: Job) -> str:
        """Add a job to the queue and return the job ID"""
        job.status = "queued"
        await self.job_queue.put(job)
        return job.job_id

    async def run_all(self, jobs: Sequence[Job]) -> list:
        """Queue ``jobs``, wait for all of them and return their results in order.

        Raises:
            JobFailedError: after every job has settled, if any failed.
        """
        await self.start()
        try:
            for job in jobs:
                await self.add_job_to_queue(job)
            await self.job_queue.join()
        finally:
            await self.stop()

        failed = [job for job in jobs if job.status == "failed"]
        if failed:
            raise JobFailedError(failed)
        return [job.results for job in jobs]
