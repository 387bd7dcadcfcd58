import json

from ._nsir import (
    KernelFamily,
    KernelSpec,
    ModelParams,
    Normalization,
    NsirError,
    config_keys,
    critical_length,
    equilibria,
    kernel_matrix,
    lambda1_interval,
    lambda1_local,
    preset_names,
    r01,
    r02,
)
from . import _nsir


def run(preset="", **settings):
    """Run a scenario in memory and return its summary as a dict.

    Keyword arguments use double underscores for the dot in a config key,
    e.g. params__k=2 sets params.k.
    """
    kv = {k.replace("__", "."): _text(v) for k, v in settings.items()}
    return json.loads(_nsir.run_summary(preset, kv))


def run_to(directory, preset="", **settings):
    kv = {k.replace("__", "."): _text(v) for k, v in settings.items()}
    return _nsir.run_to(preset, kv, str(directory))


def _text(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


__all__ = [
    "KernelFamily",
    "KernelSpec",
    "ModelParams",
    "Normalization",
    "NsirError",
    "config_keys",
    "critical_length",
    "equilibria",
    "kernel_matrix",
    "lambda1_interval",
    "lambda1_local",
    "preset_names",
    "r01",
    "r02",
    "run",
    "run_to",
]
