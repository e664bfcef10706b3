"""Exception types shared across the toolkit.

The CLI maps these onto its exit-code contract: input problems exit 2,
transport/contract/data failures exit 1.
"""

from __future__ import annotations


class ParakitError(Exception):
    """Base class for all toolkit errors."""


class InputError(ParakitError):
    """A caller-supplied value violates an operation's contract."""


class TransportError(ParakitError):
    """A remote backend was unreachable or answered with a failure status.

    ``batch_index`` identifies the failing request batch when the call was
    split into several, else None.
    """

    def __init__(self, message: str, *, batch_index: int | None = None) -> None:
        super().__init__(message)
        self.batch_index = batch_index


class ContractError(ParakitError):
    """A remote backend answered 200 but the payload violates the wire contract."""


class EmptyDatasetError(ParakitError):
    """A dataset or output contained zero usable records."""
