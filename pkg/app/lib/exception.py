from typing import Any, Optional

from app.constants.status import Status


class QTEException(Exception):
    def __init__(self, code: Status, msg: str, partial: Optional[Any] = None):
        self.code = code
        self.msg = msg
        # Whatever was computed before the failure (trajectory, chain samples).
        self.partial = partial
        super().__init__(msg)
