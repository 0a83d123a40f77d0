"""
Exception hierarchy shared by every service.

Each error carries a short machine-readable ``code`` and a human readable
``detail`` message; the command layer prints ``detail`` verbatim.
"""


class CskError(Exception):
    """Base error for constellation design, labeling and simulation."""

    code: str = "csk-error"

    def __init__(self, detail: str, code: str | None = None):
        super().__init__(detail)
        self.detail = detail
        if code is not None:
            self.code = code

    def __str__(self) -> str:
        return self.detail


class InvalidInputError(CskError):
    code = "invalid-input"


class InvalidDomainError(CskError):
    code = "invalid-domain"


class UndefinedPaprError(CskError):
    code = "undefined-papr"

    def __init__(self, led_index: int):
        super().__init__(f"PAPR undefined: LED {led_index} has zero mean intensity")
        self.led_index = led_index


class InvalidPairError(CskError):
    code = "invalid-pair"


class InfeasibleSpecError(CskError):
    code = "infeasible-spec"


class AssemblyError(CskError):
    code = "assembly-bug"


class DegenerateChannelError(CskError):
    code = "degenerate-channel"


class SingularChannelError(CskError):
    code = "singular-channel"


class UnsupportedModelError(CskError):
    code = "unsupported-model"


class DomainViolationError(CskError):
    code = "domain-violation"


class ConfigError(CskError):
    code = "config-error"
