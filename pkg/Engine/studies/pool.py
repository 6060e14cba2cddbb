"""
Bounded worker pool
Runs independent study points and returns their outcomes in input order,
so aggregation never depends on completion order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Optional

import numpy as np

from config import settings
from errors import EngineError

logger = logging.getLogger(__name__)


class Outcome(NamedTuple):
    index: int
    value: Any
    error: Optional[Dict[str, Any]]

    @property
    def ok(self) -> bool:
        return self.error is None


def resolve_workers(requested: Optional[int] = None) -> int:
    return max(1, requested or settings.GSSA_WORKERS)


def _guarded(fn: Callable[[Any], Any]) -> Callable[[tuple], Outcome]:
    def call(indexed: tuple) -> Outcome:
        index, item = indexed
        try:
            return Outcome(index, fn(item), None)
        except EngineError as exc:
            logger.warning(f"Point {index} failed: {exc.code}: {exc.message}")
            return Outcome(index, None, exc.to_record())
        except (ValueError, RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
            logger.warning(f"Point {index} failed: {type(exc).__name__}: {exc}")
            return Outcome(index, None, {"error": type(exc).__name__, "message": str(exc)})
    return call


def run_pool(fn: Callable[[Any], Any], items: Iterable[Any], workers: Optional[int] = None) -> List[Outcome]:
    """
    Apply fn to every item with at most `workers` threads

    Failures are captured per item (EngineError records or the exception
    type) instead of aborting the run.
    """
    indexed = list(enumerate(items))
    workers = resolve_workers(workers)
    call = _guarded(fn)
    logger.info(f"Running {len(indexed)} points on {workers} worker(s)")
    if workers == 1:
        return [call(pair) for pair in indexed]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(call, indexed))
