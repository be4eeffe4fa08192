"""Exception and warning types shared across the pipeline."""

from __future__ import annotations


class PatentforgeError(Exception):
    """Base class for all pipeline errors."""


class ClaimParseError(PatentforgeError):
    """Claim text could not be parsed. Carries the 1-based source line when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class EmptyInput(ClaimParseError):
    """No numbered claim block found in the input."""


class MalformedNumbering(ClaimParseError):
    """Claim numbers are duplicated or not strictly increasing."""


class DanglingDependency(ClaimParseError):
    """A dependent claim references a claim number not seen before it."""


class EmptyClaimBody(ClaimParseError):
    """A numbered claim block has an entirely empty body."""


class DuplicateFigureNumber(PatentforgeError):
    """Two drawing pages resolved to the same figure number."""


class UnknownFeature(PatentforgeError):
    """A mapping references a claim feature that does not exist."""


class UnknownComponent(PatentforgeError):
    """A mapping references a drawing component that does not exist."""


class EmptyGold(PatentforgeError):
    """precision@k called with an empty gold set."""


class UnmappedFeature(PatentforgeError):
    """Tuple building in strict mode found a feature with no mapped components."""


class MalformedXml(PatentforgeError):
    """A patent document could not be parsed as XML."""


class MissingSection(PatentforgeError):
    """A required patent section is absent. The section name is the first argument."""

    def __init__(self, section: str):
        super().__init__(f"missing required section: {section}")
        self.section = section


class UnknownBackend(PatentforgeError):
    """No generation backend registered under the requested id."""


class DuplicateId(PatentforgeError):
    """A project with the requested id already exists."""


class UnknownProject(PatentforgeError):
    """No project stored under the requested id."""


class ValidationError(PatentforgeError):
    """A request or value failed validation."""


class RevisionConflict(PatentforgeError):
    """A write carried a stale project revision."""


class ConflictWarning(UserWarning):
    """One reference numeral was seen with two different component names."""


class CleanupWarning(UserWarning):
    """Output cleaning removed a token outside the declared vocabulary."""
