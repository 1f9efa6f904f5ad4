"""Module defining Callbacks for Futures of replications running in a pool.

A Callback receives the Future plus keyword context bound with ``partial``.
The decorators below split it by outcome, so a reporter only ever sees the
value it cares about.
"""

from asyncio import Future
from functools import wraps


def callback_result(func):
    """Call ``func(result, **context)`` once the Future holds a result.
        Cancelled or failed Futures are skipped; whoever awaits the Future
        still sees the Exception.
    """

    @wraps(func)
    def callback(future: Future, **context):
        if future.done() and not (future.cancelled() or future.exception()):
            return func(future.result(), **context)

    return callback


def callback_failure(func):
    """Call ``func(exception, **context)`` when the Future failed."""

    @wraps(func)
    def callback(future: Future, **context):
        if future.done() and not future.cancelled() and future.exception():
            return func(future.exception(), **context)

    return callback
