from .base import NetworkSkeleton
from .layered import FeedForwardSkeleton, HiddenLayerSkeleton, RecurrentInputSkeleton
from .registry import SkeletonRegistry, registry

__all__ = [
    "NetworkSkeleton",
    "RecurrentInputSkeleton",
    "FeedForwardSkeleton",
    "HiddenLayerSkeleton",
    "SkeletonRegistry",
    "registry",
]
