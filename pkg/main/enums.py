from enum import Enum, IntEnum, auto, unique


@unique
class BaseEnum(str, Enum):
    @staticmethod
    def _generate_next_value_(name: str, *_):
        """
        Automatically generate values for enum.
        Enum values are lower-cased enum member names.
        """
        return name.lower()

    @classmethod
    def get_values(cls) -> list[str]:
        # noinspection PyUnresolvedReferences
        return [m.value for m in cls]


class HeadVariant(BaseEnum):
    GOAT = auto()
    ALIBI = auto()
    ABSOLUTE = auto()
    ROPE = auto()


class PriorInit(BaseEnum):
    UNIFORM = auto()
    ALIBI = auto()


class TokenSource(IntEnum):
    """Which generator rule produced a copy-mixture token."""

    NOISE = 0
    GLOBAL = 1
    LOCAL = 2


class Suite(BaseEnum):
    EOT = auto()
    CONVEXITY = auto()
    FACTORIZATION = auto()
    SCALING = auto()
    ATTENTION = auto()
    COLLAPSE = auto()
    SENSITIVITY = auto()
    MAXENT = auto()
    ALIBI = auto()
    RANK = auto()
    GRADIENTS = auto()


class Panel(BaseEnum):
    K_SINK = auto()
    K_REL = auto()
    K_CENTERED = auto()
    INDUCED_PRIOR = auto()


class AttentionPath(BaseEnum):
    COMPOSITE = auto()
    DENSE = auto()
