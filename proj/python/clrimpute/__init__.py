"""Causal-convolutional low-rank tensor imputation."""

from ._core import (
    ConfigError,
    DataError,
    Error,
    Model,
    NumericError,
    SparseTensor,
    fit,
    generate,
    load_coo,
    load_model,
    mae,
    rmse,
    split,
    write_coo,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "Model",
    "NumericError",
    "SparseTensor",
    "fit",
    "generate",
    "load_coo",
    "load_model",
    "mae",
    "rmse",
    "split",
    "write_coo",
]
__version__ = "0.1.0"
