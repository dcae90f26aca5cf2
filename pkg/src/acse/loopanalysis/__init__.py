"""Loop summarization and invariant plugins."""

from .info import LoopInfo, NonTerminating, extract_loop_info
from .plugins import DEFAULT_PLUGINS, ALL_PLUGINS, Clause, registry
from .summary import LoopAnnotation, analyze_loop

__all__ = [
    "ALL_PLUGINS", "Clause", "DEFAULT_PLUGINS", "LoopAnnotation", "LoopInfo",
    "NonTerminating", "analyze_loop", "extract_loop_info", "registry",
]
