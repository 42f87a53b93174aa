"""
Base Worker class for all internal workers
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional
import logging

logger = logging.getLogger(__name__)


class BaseWorker(ABC):
    """Base class for workers: they never talk to the user, they return result dictionaries"""

    name = "worker"

    def __init__(self, store=None):
        self.store = store
        logger.debug("SUCCESS: %s initialized", type(self).__name__)

    def failure(self, message: str, error: Exception = None, **extra) -> Dict[str, Any]:
        """Uniform failure dictionary; the error text carries the exception type"""
        result = {"success": False, "message": message,
                  "error": "" if error is None else f"{type(error).__name__}: {error}"}
        result.update(extra)
        logger.error("ERROR: %s worker: %s%s", self.name, message,
                     "" if error is None else f" ({result['error']})")
        return result

    @abstractmethod
    def process_request(self, request: Dict[str, Any], context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Process a request and return a result dictionary"""
        pass
