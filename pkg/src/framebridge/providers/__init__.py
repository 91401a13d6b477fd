"""Provider abstraction: roles, deterministic mocks, and remote wire adapters."""

from .base import (
    Embedding,
    ProviderEndpoint,
    ProviderSet,
    cosine,
    l2_normalize,
)
from .mocks import (
    MockDetector,
    MockEmbedder,
    MockEnhancer,
    MockInterpolator,
    MockKeyframeGenerator,
    MockQualityScorer,
    label_color,
    mock_provider_set,
)
from .remote import (
    RemoteDetector,
    RemoteEmbedder,
    RemoteEnhancer,
    RemoteInterpolator,
    RemoteKeyframeGenerator,
    RemoteQualityScorer,
    Transport,
    TransportError,
    UrllibTransport,
    remote_provider_set,
)

__all__ = [
    "Embedding",
    "ProviderEndpoint",
    "ProviderSet",
    "cosine",
    "l2_normalize",
    "MockDetector",
    "MockEmbedder",
    "MockEnhancer",
    "MockInterpolator",
    "MockKeyframeGenerator",
    "MockQualityScorer",
    "label_color",
    "mock_provider_set",
    "RemoteDetector",
    "RemoteEmbedder",
    "RemoteEnhancer",
    "RemoteInterpolator",
    "RemoteKeyframeGenerator",
    "RemoteQualityScorer",
    "Transport",
    "TransportError",
    "UrllibTransport",
    "remote_provider_set",
]
