"""Multi-modal point cloud completion: metrics, procedural data and trained
completion models from C++."""

from ._core import (
    Completer,
    __version__,
    chamfer,
    emd,
    families,
    generate_shape,
    kl_standard_normal,
    mmd,
    partialize,
    read_container,
    run_cli,
    tmd,
    uhd,
    uhd_metric,
    write_container,
)

__all__ = [
    "Completer",
    "chamfer",
    "emd",
    "families",
    "generate_shape",
    "kl_standard_normal",
    "mmd",
    "partialize",
    "read_container",
    "run_cli",
    "tmd",
    "uhd",
    "uhd_metric",
    "write_container",
]
