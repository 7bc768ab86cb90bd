"""Python bindings for the portraitgan C++ core."""

from ._core import (
    Model,
    Trainer,
    gram,
    load_model,
    mse,
    rasterize_landmarks,
    receptive_field,
    render_sample,
    ssim,
)

__all__ = [
    "Model",
    "Trainer",
    "gram",
    "load_model",
    "mse",
    "rasterize_landmarks",
    "receptive_field",
    "render_sample",
    "ssim",
]
