"""Python bindings for the ontoforge C++ library."""

from ._ontoforge import (
    Error,
    Graph,
    IoError,
    ParseError,
    TurtleSyntaxError,
    UnknownPrefix,
    load_project,
    project_summary,
    project_tests,
    replay_identical,
)

__all__ = [
    "Error",
    "Graph",
    "IoError",
    "ParseError",
    "TurtleSyntaxError",
    "UnknownPrefix",
    "load_project",
    "project_summary",
    "project_tests",
    "replay_identical",
]
