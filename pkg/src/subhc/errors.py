"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input violates an operation's precondition (bad vertex id, bad parameter range, ...)."""


class OracleContractError(RuntimeError):
    """A pluggable cut oracle returned an improper split."""


class ProtocolViolation(RuntimeError):
    """A simulated machine exceeded its per-round communication budget."""

    def __init__(self, machine: int, round_index: int, kind: str, words: int, budget: int):
        self.machine = machine
        self.round_index = round_index
        super().__init__(
            f"machine {machine} {kind} {words} words in round {round_index}, budget {budget}"
        )


class RecoveryFailure(RuntimeError):
    """Sparsifier recovery from sketches stalled (too many sampler failures)."""


class StreamFormatError(ValueError):
    """Malformed or inconsistent dynamic-stream input; carries a line number."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")
