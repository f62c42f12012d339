"""Exception hierarchy shared by every stage of the pipeline"""
from typing import Iterable, List, Optional


class CarouselError(Exception):
    """Base class for all package errors"""

    exit_code = 1

    def __init__(self, message: str, user_id: Optional[str] = None, carousel: Optional[str] = None):
        self.message = message
        self.user_id = user_id
        self.carousel = carousel
        super().__init__(self._render())

    def _render(self) -> str:
        context = []
        if self.user_id is not None:
            context.append(f"user={self.user_id}")
        if self.carousel is not None:
            context.append(f"carousel={self.carousel}")
        if context:
            return f"{self.message} ({', '.join(context)})"
        return self.message

    def with_context(self, user_id: Optional[str] = None, carousel: Optional[str] = None) -> "CarouselError":
        """Return a copy of this error with user/carousel context attached"""
        return type(self)(
            self.message,
            user_id=user_id if user_id is not None else self.user_id,
            carousel=carousel if carousel is not None else self.carousel,
        )


class DataError(CarouselError):
    """Structural problem with input data: missing columns, duplicate ids, unknown users"""


class InsufficientDataError(CarouselError):
    """The dataset cannot satisfy a requested split or selection"""


class ProviderError(CarouselError):
    """Unknown prediction provider or impossible provider request"""


class ConfigError(CarouselError):
    """One or more configuration values are invalid"""

    def __init__(self, messages: Iterable[str], user_id: Optional[str] = None, carousel: Optional[str] = None):
        if isinstance(messages, str):
            messages = [messages]
        self.messages: List[str] = list(messages)
        super().__init__("; ".join(self.messages), user_id=user_id, carousel=carousel)

    def with_context(self, user_id: Optional[str] = None, carousel: Optional[str] = None) -> "ConfigError":
        return ConfigError(self.messages, user_id=user_id, carousel=carousel)


class InvariantViolation(CarouselError):
    """An internal invariant was broken; this is a bug, not a user error"""

    exit_code = 2
