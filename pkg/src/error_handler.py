import logging
import sys
import traceback
from functools import wraps
from typing import Any, Callable

logger = logging.getLogger(__name__)


class DomainError(ValueError):
    pass


class CanonicalizationError(RuntimeError):
    pass


def handle_domain_error(func: Callable[..., Any]) -> Callable[..., Any]:
    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except DomainError as ex:
            logger.error(f"Domain error: {ex}")
            print(f"error: {ex}", file=sys.stderr)
            sys.exit(2)

    return wrapper


def handle_global_exception(func: Callable[..., Any]) -> Callable[..., Any]:
    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except SystemExit:
            raise
        except (Exception, BaseException) as ex:
            logger.error(f"An unexpected error occurred: {ex}")
            logger.error(traceback.format_exc())
            sys.exit(1)

    return wrapper
