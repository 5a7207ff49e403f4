"""Exception hierarchy shared by every layer of the network simulation."""


class DosnError(Exception):
    """Base class for all domain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# crypto
class AuthenticationFailed(DosnError):
    pass


# secret sharing
class DivisionByZero(DosnError, ZeroDivisionError):
    pass


class InvalidThreshold(DosnError, ValueError):
    pass


class InsufficientShares(DosnError):
    pass


class MismatchedShares(DosnError):
    pass


# merkle dag
class EmptyContent(DosnError, ValueError):
    pass


class IndexOutOfRange(DosnError, IndexError):
    pass


# ledger
class ChainInvalid(DosnError):
    pass


class TransactionRejected(DosnError):
    """A transaction failed validation; the ledger state is untouched."""


class BadSignature(TransactionRejected):
    pass


class BadNonce(TransactionRejected):
    pass


class MalformedTransaction(TransactionRejected):
    pass


class ContractRejected(TransactionRejected):
    pass


class DuplicateContent(ContractRejected):
    pass


class NotAnchored(ContractRejected):
    pass


class NotOwner(ContractRejected):
    pass


class TooFewKeyHolders(ContractRejected):
    pass


class ContractDeactivated(ContractRejected):
    pass


class UnknownPolicy(ContractRejected):
    pass


class PolicyRevoked(ContractRejected):
    pass


# storage network
class NotEnoughMiners(DosnError):
    pass


class UnknownMiner(DosnError, KeyError):
    pass


class Unavailable(DosnError):
    pass


class NotStored(DosnError, KeyError):
    pass


class BadAuthorization(DosnError):
    pass


# protocol
class UnknownContent(DosnError, KeyError):
    pass


class InvalidParameters(DosnError, ValueError):
    pass


class RollbackIncomplete(DosnError):
    """Compensating deletes after a failed publish did not all succeed."""


def error_by_name(name: str) -> type[DosnError]:
    cls = globals().get(name)
    if isinstance(cls, type) and issubclass(cls, DosnError):
        return cls
    return DosnError
