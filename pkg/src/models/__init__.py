from src.models.network import ForwardResult, IRBNetwork, build_variant

__all__ = ["ForwardResult", "IRBNetwork", "build_variant"]
