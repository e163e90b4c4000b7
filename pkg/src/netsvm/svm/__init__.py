"""Soft-margin kernel SVM trained by SMO, combined one-vs-one."""

from .kernels import KernelSpec, kernel_eval, kernel_matrix
from .model import (
    FORMAT_VERSION,
    SvmBinaryModel,
    SvmOvoModel,
    TrainConfig,
    dumps_model,
    load_model,
    loads_model,
    predict,
    save_model,
    train_binary,
    train_ovo,
)
from .smo import DEFAULT_BACKEND, available_backends, solve_dual

__all__ = [
    "DEFAULT_BACKEND",
    "FORMAT_VERSION",
    "KernelSpec",
    "SvmBinaryModel",
    "SvmOvoModel",
    "TrainConfig",
    "available_backends",
    "dumps_model",
    "kernel_eval",
    "kernel_matrix",
    "load_model",
    "loads_model",
    "predict",
    "save_model",
    "solve_dual",
    "train_binary",
    "train_ovo",
]
