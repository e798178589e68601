"""Exception types raised across the toolkit."""


class KpEvalError(Exception):
    """Base class for all toolkit errors."""


class EmptyPhrase(KpEvalError):
    """No tokens survived phrase normalization."""


class ParseError(KpEvalError):
    """Malformed dataset or judgment file; message carries file and line."""


class DuplicateId(KpEvalError):
    """The same document id appeared more than once."""


class ProviderUnavailable(KpEvalError):
    """An HTTP-backed provider could not be reached."""


class MissingEmbedding(KpEvalError):
    """File-backed provider has no vector for the requested phrase."""


class DimMismatch(KpEvalError):
    """Vectors of different dimensionality were combined."""


class ZeroNorm(KpEvalError):
    """A zero vector reached similarity computation."""


class EmptySet(KpEvalError):
    """An operation required a non-empty phrase or vector set."""


class EmptyReferences(KpEvalError):
    """Reference-based metric called with no references."""


class EmptyPredictions(KpEvalError):
    """Per-prediction scoring called with no predictions."""


class EmptyCorpus(KpEvalError):
    """Retrieval index construction over an empty corpus."""


class EmptyQuery(KpEvalError):
    """Retrieval query had no usable terms."""


class MissingDoc(KpEvalError):
    """The target document is not present in a retrieval index."""


class DegenerateMass(KpEvalError):
    """Boolean-QA normalization with p_yes + p_no == 0."""


class ZeroVariance(KpEvalError):
    """Correlation input with a constant side."""


class LengthMismatch(KpEvalError):
    """Paired sequences of unequal length."""


class AllTied(KpEvalError):
    """Kendall tau denominator is zero (one side fully tied)."""


class TooFewValid(KpEvalError):
    """More than half of bootstrap resamples were degenerate."""


class TooFewPhrases(KpEvalError):
    """Uniformity sampling needs at least two distinct phrases."""


class UnmatchedIds(KpEvalError):
    """Human-judgment ids that do not exist in the dataset."""


class ConfigError(KpEvalError):
    """Invalid or inconsistent evaluation configuration."""


class EmptyReport(KpEvalError):
    """Report emission with no per-document rows."""
