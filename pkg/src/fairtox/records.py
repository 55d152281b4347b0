"""Core record types passed between pipeline stages."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Identity(enum.Enum):
    """Tri-state identity annotation of a comment."""

    IDENTITY = "identity"
    NON_IDENTITY = "non_identity"
    UNANNOTATED = "unannotated"


class Category(enum.Enum):
    """The 2x2 toxicity-by-identity taxonomy used for rebalancing."""

    TOXIC_IDENTITY = "toxic_identity"
    TOXIC_NON_IDENTITY = "toxic_non_identity"
    NONTOXIC_IDENTITY = "nontoxic_identity"
    NONTOXIC_NON_IDENTITY = "nontoxic_non_identity"

    @property
    def is_toxic(self) -> bool:
        return self in (Category.TOXIC_IDENTITY, Category.TOXIC_NON_IDENTITY)

    @property
    def is_identity(self) -> bool:
        return self in (Category.TOXIC_IDENTITY, Category.NONTOXIC_IDENTITY)


def category_for(label: int, identity: Identity) -> Category | None:
    """Category cell for a (label, identity) pair; None when unannotated."""
    if identity is Identity.UNANNOTATED:
        return None
    if label == 1:
        return Category.TOXIC_IDENTITY if identity is Identity.IDENTITY else Category.TOXIC_NON_IDENTITY
    return Category.NONTOXIC_IDENTITY if identity is Identity.IDENTITY else Category.NONTOXIC_NON_IDENTITY


class Origin(enum.Enum):
    REAL = "real"
    SYNTHETIC = "synthetic"


@dataclass
class CommentRecord:
    """One row of a comment corpus.

    ``identity_fractions`` maps identity-attribute names to the fraction of
    annotators who saw that identity referenced; it is None for rows that
    carry no identity annotation at all.
    """

    id: str
    text: str
    toxicity: float
    identity_fractions: dict[str, float] | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("comment text is empty")
        if not 0.0 <= self.toxicity <= 1.0:
            raise ValueError(f"toxicity {self.toxicity} outside [0, 1]")
        if self.identity_fractions is not None:
            for name, frac in self.identity_fractions.items():
                if not 0.0 <= frac <= 1.0:
                    raise ValueError(f"identity fraction {name}={frac} outside [0, 1]")


@dataclass
class LabeledExample:
    """A tokenized comment with its binary label and category assignment."""

    tokens: list[str]
    label: int
    identity: Identity
    category: Category | None
    origin: Origin = Origin.REAL
    example_id: str = ""

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        expected = category_for(self.label, self.identity)
        if self.category != expected:
            raise ValueError(
                f"category {self.category} inconsistent with label={self.label}, identity={self.identity}"
            )
        if self.origin is Origin.SYNTHETIC and self.identity is Identity.UNANNOTATED:
            raise ValueError("synthetic examples must carry an identity flag")

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass
class DatasetSplit:
    """Disjoint train/validation/test partitions of a labeled corpus."""

    train: list[LabeledExample]
    validation: list[LabeledExample]
    test: list[LabeledExample]
    seed: int
    fractions: tuple[float, float, float]

    def __len__(self) -> int:
        return len(self.train) + len(self.validation) + len(self.test)


@dataclass
class TweetRecord:
    party: str
    handle: str
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("tweet text is empty")


