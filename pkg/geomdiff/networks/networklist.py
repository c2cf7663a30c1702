from .scorenetwork import NetworkConfig, TranslationInvariantNetwork
from .mlpnetwork import MlpScoreNetwork
from .biattention import BiAttentionScoreNetwork
from .egnn import EgnnScoreNetwork


architecture_full_list = [
    MlpScoreNetwork,
    BiAttentionScoreNetwork,
    EgnnScoreNetwork,
]

architecture_dict = {network_class.architecture_name: network_class for network_class in architecture_full_list}


def build_network(config):
    '''Instantiates the architecture named in a NetworkConfig (or its dict form).'''
    if isinstance(config, dict):
        config = NetworkConfig.from_dict(config)
    if config.architecture not in architecture_dict:
        raise ValueError("unknown architecture: " + str(config.architecture) + "; choose from " +
                         str(sorted(architecture_dict)))
    network = architecture_dict[config.architecture](config)
    if config.translation_invariant:
        network = TranslationInvariantNetwork(network)
    return network
