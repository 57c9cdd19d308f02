import logging
from typing import Any, Dict, Type

from .base import NetworkSkeleton
from .layered import FeedForwardSkeleton, HiddenLayerSkeleton, RecurrentInputSkeleton

logger = logging.getLogger(__name__)


class SkeletonRegistry:
    """Registry of network topologies available for evolution"""
    def __init__(self):
        self._skeletons: Dict[str, Type[NetworkSkeleton]] = {}
        self.register_defaults()

    def register_defaults(self):
        """Register default topologies"""
        self.register_skeleton("recurrent", RecurrentInputSkeleton)
        self.register_skeleton("feedforward", FeedForwardSkeleton)
        self.register_skeleton("hidden", HiddenLayerSkeleton)

    def register_skeleton(self, name: str, skeleton_class: Type[NetworkSkeleton]):
        """Register a new topology class"""
        self._skeletons[name] = skeleton_class
        logger.debug(f"Registered skeleton {name}")

    def get_skeleton(self, name: str, **kwargs) -> NetworkSkeleton:
        """Create a skeleton instance; kwargs go to its constructor"""
        if name not in self._skeletons:
            logger.error(f"Skeleton {name} not found in registry")
            raise KeyError(f"unknown network skeleton '{name}', available: {sorted(self._skeletons)}")
        return self._skeletons[name](**kwargs)

    def names(self):
        return sorted(self._skeletons)

    def get_available_skeletons(self) -> Dict[str, Dict[str, Any]]:
        """Get metadata for all registered skeletons"""
        return {name: self.get_skeleton(name).metadata for name in self.names()}


# Global registry instance
registry = SkeletonRegistry()
