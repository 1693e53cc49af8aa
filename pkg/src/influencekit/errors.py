"""Exception types raised across the toolkit."""


class InfluenceKitError(Exception):
    """Base class for all toolkit errors."""


# --- manifest / sample ingestion ---

class MalformedManifest(InfluenceKitError):
    pass


class DuplicateDatasetId(MalformedManifest):
    pass


class NonPositiveDim(MalformedManifest):
    pass


class MalformedRecord(InfluenceKitError):
    """A sample line failed to parse or validate; the message carries file:line."""


class DimensionMismatch(InfluenceKitError):
    pass


class EmptyDataset(InfluenceKitError):
    pass


class ZeroNormEmbedding(MalformedRecord):
    pass


class EmptyLogprobs(MalformedRecord):
    pass


class PositiveLogprob(MalformedRecord):
    pass


# --- clustering / diversity ---

class EmptyInput(InfluenceKitError):
    pass


class InconsistentAssignment(InfluenceKitError):
    pass


# --- ranking evaluation ---

class ZeroBaseScore(InfluenceKitError):
    pass


class LengthMismatch(InfluenceKitError):
    pass


class DegenerateInput(InfluenceKitError):
    """A ranking vector is constant, so no ordering can be extracted."""


class IdMismatch(InfluenceKitError):
    pass


# --- scoring / selection ---

class UnknownDatasetId(InfluenceKitError):
    pass


class AllScoresNonPositive(InfluenceKitError):
    pass


class InsufficientPool(InfluenceKitError):
    pass


class FingerprintMismatch(InfluenceKitError):
    pass


# --- synthetic worlds ---

class InvalidSpec(InfluenceKitError):
    pass
