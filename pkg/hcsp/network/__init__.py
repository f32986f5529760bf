from .mlp import NetworkConfig, PeriodicEmbedding, embed, forward, glorot_init, network_features  # noqa
