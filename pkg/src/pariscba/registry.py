"""Command registry: one Command class per CLI subcommand."""

import re
import typing
from dataclasses import MISSING, fields
from typing import Dict, List, Type, TypeVar

from .job import Command

C = TypeVar("C", bound=Command)

# Fields of the Job/Command base classes that are not command-line options
EXCLUDED_FIELDS = {
    "job_id",  # Auto-generated
    "status",  # Internal state
    "results",  # Internal
    "heading",  # Internal
    "started_at",  # Internal
    "completed_at",  # Internal
    "semaphore_name",  # Internal
    "error_message",  # Internal
    "error_type",  # Internal
    "error_traceback",  # Internal
    "config",  # Built from the shared flags
}


def _plain_type(annotation):
    """``Optional[X]`` -> ``X``; anything else unchanged."""
    args = [a for a in typing.get_args(annotation) if a is not type(None)]
    if typing.get_origin(annotation) is typing.Union and len(args) == 1:
        return args[0]
    return annotation


class CommandRegistry:
    """Registry for Command subclasses that enables automatic subcommand generation."""

    def __init__(self):
        self._commands: Dict[str, Type[Command]] = {}

    def register(self, command_class: Type[C]) -> Type[C]:
        """Register a Command subclass; usable as a decorator.

        Example:
            @registry.register
            class KayaCommand(Command):
                ...
        """
        if not isinstance(command_class, type) or not issubclass(command_class, Command):
            raise ValueError(f"{getattr(command_class, '__name__', command_class)} must be a subclass of Command")
        self._commands[self.class_name_to_command(command_class.__name__)] = command_class
        return command_class

    def get_command_class(self, name: str) -> Type[Command]:
        """Get a registered command class by subcommand name."""
        if name not in self._commands:
            raise ValueError(f"Command {name} is not registered")
        return self._commands[name]

    def get_all_commands(self) -> Dict[str, Type[Command]]:
        """Get all registered commands, keyed by subcommand name."""
        return self._commands.copy()

    def get_cli_params(self, command_class: Type[Command]) -> List[Dict]:
        """Command-line options from a Command class's dataclass fields.

        Returns dictionaries with keys name, type, default, required.
        """
        params = []
        for field_info in fields(command_class):
            if field_info.name in EXCLUDED_FIELDS:
                continue
            has_default = field_info.default is not MISSING
            has_default_factory = field_info.default_factory is not MISSING
            params.append(
                {
                    "name": field_info.name,
                    "type": _plain_type(field_info.type),
                    "default": field_info.default if has_default else None,
                    "required": not (has_default or has_default_factory),
                }
            )
        return params

    @staticmethod
    def class_name_to_command(class_name: str) -> str:
        """Convert a class name to a subcommand name.

        Drops a trailing ``Command`` and converts CamelCase to snake_case.

        Examples:
            KayaCommand -> kaya
            NetbenCommand -> netben
            HTTPFetchCommand -> http_fetch
        """
        name = re.sub(r"Command$", "", class_name) or class_name
        result = re.sub(r"([a-z])([A-Z])", r"\1_\2", name)
        result = re.sub(r"([A-Z]+)([A-Z][a-z])", r"\1_\2", result)
        return result.lower()


# Global registry instance
registry = CommandRegistry()
