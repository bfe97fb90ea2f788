from __future__ import annotations

import importlib
import typing
from dataclasses import dataclass, field

from ..utils.logger import logger


class DomainError(ValueError):
    """Base class of the errors a caller can provoke with bad input."""


class CompositeModulusError(DomainError):
    pass


class VertexRangeError(DomainError, IndexError):
    pass


class GraphNotConnectedError(DomainError):
    pass


class PreconditionError(DomainError):
    pass


class DimensionMismatchError(DomainError):
    pass


class DimensionCapError(DomainError):
    pass


class PhaseConventionError(DomainError):
    pass


class NonCommutingError(DomainError):
    pass


class TranscriptionError(DomainError):
    """Encoded data disagrees with its reference checksum."""


@dataclass
class Code:
    name: str = ""
    """代码名称，也是调用 plugin 的 identifier"""

    module_path: str = ""
    """模块路径， 可用于 import 模块"""

    description: str = ""
    version: str = ""
    copyright: str = ""
    parameters: dict = field(default_factory=dict)

    def __str__(self) -> str:
        return "-".join([s for s in [self.module_path, self.version, self.copyright] if s])

    def __repr__(self) -> str:
        desc = {"name": self.name, "version": self.version, "copyright": self.copyright}
        return ", ".join([f"{key}='{value}'" for key, value in desc.items() if value])


class Module:
    """Base of pluggable computations.

    Subclasses that define ``_plugin_prefix`` act as plugin families: concrete
    implementations live in ``<_plugin_prefix><name>`` and add themselves with
    :meth:`register`.
    """

    _plugin_registry: typing.Dict[str, typing.Type[Module]] = {}
    _plugin_prefix: str = "fynet.modules."

    code: typing.Union[Code, dict] = {}

    def __init__(self, **parameters):
        code = self.__class__.code
        self.code = Code(**code) if isinstance(code, dict) else Code(**vars(code))

        if not self.code.name:
            self.code.name = self.__class__.__name__

        self.code.module_path = f"{self.__class__._plugin_prefix}{self.code.name}"
        self.code.parameters = {**self.code.parameters, **parameters}

        logger.info(f"Initialize module {self.code} ")

    @classmethod
    def _registry_key(cls, name: str) -> str:
        return f"{cls._plugin_prefix}{name}"

    @classmethod
    def register(cls, names: typing.Union[str, typing.List[str]], plugin: typing.Type[Module] = None):
        """Register ``plugin`` under one or more names; usable as a decorator."""

        if isinstance(names, str):
            names = [names]

        def _register(plugin_cls):
            for name in names:
                cls._plugin_registry[cls._registry_key(name)] = plugin_cls
            return plugin_cls

        return _register(plugin) if plugin is not None else _register

    @classmethod
    def plugins(cls) -> typing.List[str]:
        prefix = cls._plugin_prefix
        return sorted(k[len(prefix) :] for k in cls._plugin_registry if k.startswith(prefix))

    @classmethod
    def create(cls, name: str, **parameters) -> Module:
        key = cls._registry_key(name)

        if key not in cls._plugin_registry:
            try:
                importlib.import_module(key)
            except ModuleNotFoundError as error:
                raise PreconditionError(f"Unknown plugin '{name}' for {cls.__name__}") from error

        plugin = cls._plugin_registry.get(key, None)

        if plugin is None:
            raise PreconditionError(f"Module '{key}' does not register a plugin named '{name}'")

        return plugin(**parameters)
