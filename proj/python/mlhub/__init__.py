"""Python interface to the hub client core.

The heavy lifting (ARFF parsing, learners, cross-validation, the HTTP client
and the in-process hub) lives in the compiled extension ``mlhub._core``; this
package re-exports its public surface.
"""

from mlhub._core import (
    READ_ONLY_APIKEY,
    SECOND_WRITER_APIKEY,
    WRITER_APIKEY,
    Client,
    HubError,
    LocalHub,
    Relation,
    __version__,
    builtin_learners,
    cv_splits,
    parse_arff,
    write_arff,
)

__all__ = [
    "READ_ONLY_APIKEY",
    "SECOND_WRITER_APIKEY",
    "WRITER_APIKEY",
    "Client",
    "HubError",
    "LocalHub",
    "Relation",
    "__version__",
    "builtin_learners",
    "cv_splits",
    "parse_arff",
    "write_arff",
]
