"""
numpy float64 tensors with reverse-mode differentiation
"""
from autodiff.conv import conv2d, gated_conv, unfold
from autodiff.gradcheck import grad_check
from autodiff.spectral import SpectralState, spectral_normalize
from autodiff.tensor import Tensor, no_grad, softmax

__all__ = [
    "Tensor",
    "no_grad",
    "softmax",
    "conv2d",
    "gated_conv",
    "unfold",
    "grad_check",
    "SpectralState",
    "spectral_normalize",
]
