from .layers import (
    AvgPool1D, Conv1D, Dense, Dropout, Flatten, LSTM, LayerSpec, SeqFromVec, sigmoid,
)
from .loss import bce_loss, bce_with_grad, CLAMP_EPS
from .optim import Adam
from .network import (
    Network, TrainConfig, TrainHistory, build_network, fit_network,
    parameter_count, train,
)

__all__ = [
    "Adam", "AvgPool1D", "CLAMP_EPS", "Conv1D", "Dense", "Dropout", "Flatten",
    "LSTM", "LayerSpec", "Network", "SeqFromVec", "TrainConfig", "TrainHistory",
    "bce_loss", "bce_with_grad", "build_network", "fit_network",
    "parameter_count", "sigmoid", "train",
]
