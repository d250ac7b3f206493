"""Phasorial embedding fields: Fourier-domain feature volumes decoded by a small MLP."""

from ._core import (
    Checkpoint,
    DimensionError,
    DomainError,
    Error,
    FormatError,
    FrequencyLayout,
    IoError,
    LayoutError,
    NumericError,
    PhasorVolume,
    UsageError,
    cli,
    eval_derivative,
    eval_exact,
    eval_fast,
    extract_mesh,
    gaussian_filter,
    high_band_energy,
    load_checkpoint,
    marching_cubes,
    psnr,
    read_image,
    render,
    save_checkpoint,
    selftest,
    spatial_energy,
    spectral_energy,
    sphere_iou,
    write_image,
)

__all__ = [
    "Checkpoint",
    "DimensionError",
    "DomainError",
    "Error",
    "FormatError",
    "FrequencyLayout",
    "IoError",
    "LayoutError",
    "NumericError",
    "PhasorVolume",
    "UsageError",
    "cli",
    "eval_derivative",
    "eval_exact",
    "eval_fast",
    "extract_mesh",
    "gaussian_filter",
    "high_band_energy",
    "load_checkpoint",
    "marching_cubes",
    "psnr",
    "read_image",
    "render",
    "save_checkpoint",
    "selftest",
    "spatial_energy",
    "spectral_energy",
    "sphere_iou",
    "write_image",
]
