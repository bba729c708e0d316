"""Multi-surface TLS observability toolkit.

Decodes passive handshake captures, runs guardrailed active probes, parses
certificate-chain evidence and fuses all of it into uncertainty-preserving
measurement objects, with a frozen benchmark suite and campaign tooling on
top.
"""

__version__ = "0.1.0"

PARSER_VERSION = __version__

from .evidence import EvidenceState, EvidenceValue  # noqa: E402,F401
from .registry import RegistryBundle, RegistryEntry, default_registry, load_registry  # noqa: E402,F401
