"""Adapter seam for foreign session analyzers.

An adapter translates another tool's output (a baseline passive analyzer,
a scanner run, a capture pipeline) into this package's evidence types so
inference, reporting and comparison treat it like any native surface.
Only the contract ships here; v1 implements no adapter for any specific
external tool, and baseline numbers produced by such tools stay external
to this codebase.

Translation rules an implementation must honour:

- Never fabricate: a fact the tool did not assert becomes unknown with a
  reason naming the adapter, not a guessed value.
- Provenance is the tool's, not the adapter's: observed_at comes from the
  tool's own record of when it looked, and origin labels the tool.
- Identifiers go through the registry: raw codepoints and OIDs are
  canonicalized exactly like native observations, so registry gaps
  surface as unknown_identifier reasons instead of invented names.
- One artifact, one bundle: convert() maps a single analysis artifact to
  a single evidence bundle; callers own batching and mode selection.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

from .engine import EvidenceBundle


class SessionAnalyzerAdapter(ABC):
    """Contract for feeding a foreign analyzer's output into inference."""

    #: stable identifier used in provenance origin labels
    name: str = "unnamed"

    @abstractmethod
    def convert(self, artifact: object) -> EvidenceBundle:
        """Translate one analysis artifact into an evidence bundle.

        artifact is whatever the tool emits (parsed JSON, a report path,
        raw bytes); the adapter owns decoding it. Raise SchemaError for
        artifacts it cannot interpret rather than returning an empty
        bundle, so unreadable input is distinguishable from a session
        that genuinely showed nothing.
        """

    def describe(self) -> dict:
        """Machine-readable self-description for run manifests."""
        return {"adapter": self.name, "class": type(self).__name__}
