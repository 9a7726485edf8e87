"""From-scratch convolutional classifier: layers, training and model files."""

from .layers import Conv2D, Dense, Flatten, Layer, MaxPool2, ReLU, ResidualBlock, Softmax
from .modelio import load_model, model_bytes, save_model
from .network import (
    ARCHITECTURES,
    Network,
    backward,
    build_network,
    forward,
    images_to_input,
    loss_and_grad,
    predict,
    predict_proba,
    softmax,
)
from .training import TrainConfig, TrainHistory, evaluate, train

__all__ = [
    "ARCHITECTURES", "Conv2D", "Dense", "Flatten", "Layer", "MaxPool2", "Network", "ReLU",
    "ResidualBlock", "Softmax", "TrainConfig", "TrainHistory", "backward", "build_network",
    "evaluate", "forward", "images_to_input", "load_model", "loss_and_grad", "model_bytes",
    "predict", "predict_proba", "save_model", "softmax", "train",
]
