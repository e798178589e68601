"""kpeval: multi-dimensional keyphrase evaluation toolkit."""

__version__ = "0.1.0"
