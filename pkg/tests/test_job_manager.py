"""Tests for Job execution, error capture and the JobManager."""

import logging
import threading
import time
from dataclasses import dataclass

import pytest
import pytest_asyncio

from pariscba.exceptions import JobFailedError
from pariscba.job import DrawBatchJob, Job
from pariscba.manager import JobManager


@dataclass
class SquareJob(Job):
    """Returns value squared after a short pause."""

    value: int = 0
    pause: float = 0.0

    def run(self):
        time.sleep(self.pause)
        return self.value**2


@dataclass
class FailingJob(Job):
    """Job that always fails with a specific error."""

    def run(self):
        raise ValueError("This is a test error")


@dataclass
class CountingJob(Job):
    """Records how many instances run at the same time."""

    tracker: dict = None
    semaphore_name: str = "single"

    def run(self):
        with self.tracker["lock"]:
            self.tracker["running"] += 1
            self.tracker["peak"] = max(self.tracker["peak"], self.tracker["running"])
        time.sleep(0.05)
        with self.tracker["lock"]:
            self.tracker["running"] -= 1


@pytest_asyncio.fixture
async def manager():
    """A fresh JobManager, stopped after the test"""
    job_manager = JobManager(max_workers=4)
    yield job_manager
    if job_manager._worker_tasks:
        await job_manager.stop()


def test_capture_error_method():
    """capture_error records type, message and traceback"""
    job = SquareJob()
    job.capture_error(ValueError("Test error message"))

    assert job.error_type == "ValueError"
    assert job.error_message == "Test error message"
    assert "ValueError: Test error message" in job.error_traceback
    assert job.status == "failed"


async def test_execute_stores_results(caplog):
    """execute runs the job in a thread and records its timing"""
    job = SquareJob(value=7, pause=0.05, heading="seven")
    with caplog.at_level(logging.DEBUG, logger="pariscba.job"):
        await job.execute()

    assert job.results == 49
    assert job.status == "done"
    assert job.completed_at >= job.started_at
    assert "seven done in" in caplog.text


async def test_execute_handles_exceptions():
    """execute captures the failure on the job and re-raises it"""
    job = FailingJob()
    with pytest.raises(ValueError, match="This is a test error"):
        await job.execute()

    assert job.status == "failed"
    assert job.error_type == "ValueError"
    assert job.completed_at is not None


def test_base_job_run_is_abstract():
    with pytest.raises(NotImplementedError):
        Job().run()


def test_draw_batch_job_calls_evaluate():
    job = DrawBatchJob(start=3, stop=6, evaluate=lambda a, b: list(range(a, b)))

    assert job.run() == [3, 4, 5]
    assert job.heading == "draws 3-5"
    assert job.semaphore_name == "multiple"
    with pytest.raises(ValueError, match="evaluate"):
        DrawBatchJob(start=0, stop=1).run()


async def test_manager_initialization(manager):
    assert manager._worker_tasks == []
    assert set(manager.semaphores) == {"single", "multiple", "default"}


async def test_start_and_stop(manager):
    await manager.start()
    assert len(manager._worker_tasks) == 4

    await manager.stop()
    assert manager._worker_tasks == []


async def test_run_all_returns_results_in_job_order(manager):
    """Results follow the job list even when later jobs finish first"""
    jobs = [SquareJob(value=v, pause=0.05 * (4 - v)) for v in range(4)]

    assert await manager.run_all(jobs) == [0, 1, 4, 9]
    assert all(job.status == "done" for job in jobs)
    assert manager._worker_tasks == []


async def test_run_all_raises_after_every_job_settles(manager):
    jobs = [SquareJob(value=2), FailingJob(), SquareJob(value=3)]

    with pytest.raises(JobFailedError, match="1 job\\(s\\) failed; first: ValueError: This is a test error") as info:
        await manager.run_all(jobs)

    assert info.value.failed == [jobs[1]]
    assert jobs[0].results == 4
    assert jobs[2].results == 9


async def test_single_semaphore_runs_one_at_a_time(manager):
    tracker = {"lock": threading.Lock(), "running": 0, "peak": 0}
    jobs = [CountingJob(tracker=tracker) for _ in range(4)]

    await manager.run_all(jobs)
    assert tracker["peak"] == 1


async def test_multiple_semaphore_allows_parallel_batches():
    tracker = {"lock": threading.Lock(), "running": 0, "peak": 0}
    jobs = [CountingJob(tracker=tracker, semaphore_name="multiple") for _ in range(4)]

    await JobManager(max_workers=4, multiple_limit=2).run_all(jobs)
    assert 1 < tracker["peak"] <= 2


async def test_queued_job_is_run_by_a_started_worker(manager):
    job = SquareJob(value=5)
    await manager.start()

    assert await manager.add_job_to_queue(job) == job.job_id
    await manager.job_queue.join()
    assert job.results == 25


async def test_failures_are_logged_with_the_job_label(manager, caplog):
    """The manager logs a failed job by its heading"""
    with pytest.raises(JobFailedError):
        await manager.run_all([FailingJob(heading="broken batch")])

    assert "broken batch failed: This is a test error" in caplog.text


def test_label_falls_back_to_class_and_id():
    job = SquareJob()

    assert job.label == f"SquareJob {job.job_id}"
