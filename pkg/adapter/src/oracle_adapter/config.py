"""Adapter configuration: which model to serve and what shape it has."""

from __future__ import annotations

import importlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .stub import testbed_prototypes

MODE_STUB = "stub"
MODE_USER = "user-model"


class AdapterConfigError(ValueError):
    """Raised for configurations that cannot describe a servable model."""


@dataclass(frozen=True)
class StubSpec:
    """Prototype set plus softmax temperature for the built-in stub."""

    prototypes: np.ndarray
    temperature: float

    def __post_init__(self) -> None:
        protos = np.asarray(self.prototypes, dtype=np.float64)
        object.__setattr__(self, "prototypes", protos)
        if protos.ndim != 2 or protos.shape[0] < 2 or protos.shape[1] < 1:
            raise AdapterConfigError(
                f"prototypes must be (k >= 2, n >= 1), got shape {protos.shape}"
            )
        if not np.all(np.isfinite(protos)):
            raise AdapterConfigError("prototypes must be finite")
        if not (self.temperature > 0.0):
            raise AdapterConfigError(f"temperature must be positive, got {self.temperature}")

    @classmethod
    def testbed(
        cls,
        latent_dim: int = 8,
        num_classes: int = 5,
        seed: int = 101,
        temperature: float = 2.0,
    ) -> "StubSpec":
        return cls(testbed_prototypes(latent_dim, num_classes, seed), temperature)


@dataclass(frozen=True)
class AdapterConfig:
    """One servable model: either the stub or a pair of user entry points.

    User entry points are "module:attribute" strings. The classifier maps a
    (batch, feature) array to (batch, num_classes) probabilities; the
    generator, if given, maps latent codes to the classifier's input and
    defaults to the identity.
    """

    mode: str = MODE_STUB
    latent_dim: int = 8
    num_classes: int = 5
    stub: StubSpec | None = None
    generator: str | None = None
    classifier: str | None = None

    def __post_init__(self) -> None:
        if self.latent_dim < 1:
            raise AdapterConfigError(f"latent_dim must be >= 1, got {self.latent_dim}")
        if self.num_classes < 2:
            raise AdapterConfigError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.mode == MODE_STUB:
            spec = self.stub if self.stub is not None else StubSpec.testbed(
                self.latent_dim, self.num_classes
            )
            if spec.prototypes.shape != (self.num_classes, self.latent_dim):
                raise AdapterConfigError(
                    f"stub prototypes shape {spec.prototypes.shape} does not match "
                    f"({self.num_classes}, {self.latent_dim})"
                )
            object.__setattr__(self, "stub", spec)
        elif self.mode == MODE_USER:
            if self.classifier is None:
                raise AdapterConfigError("user-model mode needs a classifier entry point")
            # Fail at configuration time, not on the first query.
            resolve_entry_point(self.classifier)
            if self.generator is not None:
                resolve_entry_point(self.generator)
        else:
            raise AdapterConfigError(f"mode must be 'stub' or 'user-model', got {self.mode!r}")


def resolve_entry_point(spec: str) -> Callable:
    """Import "module:attribute" and return the attribute; must be callable."""
    module_name, sep, attr = spec.partition(":")
    if not sep or not module_name or not attr:
        raise AdapterConfigError(f"entry point must look like 'module:attribute', got {spec!r}")
    try:
        module = importlib.import_module(module_name)
    except ImportError as exc:
        raise AdapterConfigError(f"cannot import {module_name!r}: {exc}") from None
    try:
        fn = getattr(module, attr)
    except AttributeError:
        raise AdapterConfigError(f"module {module_name!r} has no attribute {attr!r}") from None
    if not callable(fn):
        raise AdapterConfigError(f"entry point {spec!r} is not callable")
    return fn
