"""Cooperative cancellation for long-running solvers.

Iterative algorithms poll a token at least once per outer iteration; the
benchmark harness arms tokens with deadlines so runs can be cut off without
killing the worker.
"""

from __future__ import annotations

import time

from .errors import Cancelled


class CancellationToken:
    def __init__(self, deadline=None):
        self.deadline = deadline
        self._cancelled = False

    def cancel(self):
        self._cancelled = True

    def expired(self):
        if self._cancelled:
            return True
        return self.deadline is not None and time.monotonic() > self.deadline

    def check(self):
        if self.expired():
            raise Cancelled("run cancelled by deadline")


NEVER = CancellationToken()


def with_timeout(seconds):
    if seconds is None:
        return CancellationToken()
    return CancellationToken(deadline=time.monotonic() + seconds)
