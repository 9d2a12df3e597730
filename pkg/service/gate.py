# service/gate.py
from __future__ import annotations

import asyncio
from dataclasses import dataclass
from typing import Optional


@dataclass
class Gate:
    slots: int
    sem: asyncio.BoundedSemaphore  # admission gate for analysis jobs


_gate: Optional[Gate] = None


def init_gate(job_slots: int = 1) -> None:
    """
    Create the admission gate once per process.

    Args:
        job_slots (int): Number of analysis jobs allowed to run concurrently.
    """
    global _gate
    if _gate is not None:
        return
    _gate = Gate(slots=job_slots, sem=asyncio.BoundedSemaphore(job_slots))


def reset_gate() -> None:
    global _gate
    _gate = None


def get_gate() -> Gate:
    """
    Retrieve the initialized gate.

    Returns:
        Gate: The admission gate.
    """
    if _gate is None:
        raise RuntimeError("Admission gate is not initialized yet.")
    return _gate


def gate_busy() -> bool:
    """
    Check whether every job slot is taken.

    Returns:
        bool: True if a new job would have to wait.
    """
    return get_gate().sem.locked()


async def try_admit_now() -> bool:
    """
    Try to take a job slot without waiting. On success the caller holds the
    slot until it calls release_slot().

    Returns:
        bool: True if admitted, False if the gate is full.
    """
    g = get_gate()
    if g.sem.locked():
        return False
    try:
        # NOTE:
        # timeout=0 raises TimeoutError even when a slot is free; give the
        # event loop a short moment to schedule the acquire.
        await asyncio.wait_for(g.sem.acquire(), timeout=0.1)
    except asyncio.TimeoutError:
        return False
    return True


async def try_admit_with_timeout(timeout_s: float) -> bool:
    """
    Take a job slot, waiting up to timeout_s. On success the caller holds the
    slot until it calls release_slot().

    Args:
        timeout_s (float): Timeout in seconds to wait for admission.

    Returns:
        bool: True if admitted within the timeout, False otherwise.
    """
    g = get_gate()
    try:
        await asyncio.wait_for(g.sem.acquire(), timeout=timeout_s)
    except asyncio.TimeoutError:
        return False
    return True


def release_slot() -> None:
    """Give back a slot taken by try_admit_now or try_admit_with_timeout."""
    get_gate().sem.release()
