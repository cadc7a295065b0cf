from dataclasses import dataclass
from typing import Optional

import pytest

from pariscba import commands  # noqa: F401
from pariscba.commands import ImpactsCommand, KayaCommand
from pariscba.job import Command
from pariscba.registry import EXCLUDED_FIELDS, CommandRegistry, registry


def test_registry_register_and_get():
    """Registered commands are retrievable by subcommand name"""
    test_registry = CommandRegistry()
    test_registry.register(KayaCommand)

    assert test_registry.get_command_class("kaya") is KayaCommand
    assert "kaya" in test_registry.get_all_commands()


def test_registry_register_returns_class():
    """register() works as a decorator"""
    test_registry = CommandRegistry()

    @test_registry.register
    @dataclass
    class EchoCommand(Command):
        text: str = "hello"

    assert EchoCommand.__name__ == "EchoCommand"
    assert test_registry.get_command_class("echo") is EchoCommand


def test_registry_register_invalid_class():
    """Classes that are not Commands are rejected"""
    test_registry = CommandRegistry()

    class NotACommand:
        pass

    with pytest.raises(ValueError, match="must be a subclass of Command"):
        test_registry.register(NotACommand)


def test_registry_get_command_class_not_found():
    """Looking up an unknown subcommand raises"""
    test_registry = CommandRegistry()

    with pytest.raises(ValueError, match="is not registered"):
        test_registry.get_command_class("no_such_command")


def test_registry_class_name_to_command():
    """Class names convert to snake_case subcommand names"""
    assert CommandRegistry.class_name_to_command("KayaCommand") == "kaya"
    assert CommandRegistry.class_name_to_command("NetbenCommand") == "netben"
    assert CommandRegistry.class_name_to_command("HTTPFetchCommand") == "http_fetch"
    assert CommandRegistry.class_name_to_command("MyCustomCommand") == "my_custom"
    assert CommandRegistry.class_name_to_command("Command") == "command"


def test_registry_get_cli_params():
    """Command-specific fields become options with their defaults"""
    test_registry = CommandRegistry()
    params = {p["name"]: p for p in test_registry.get_cli_params(ImpactsCommand)}

    assert set(params) == {"estimates", "warming"}
    assert params["estimates"]["type"] is str
    assert params["estimates"]["required"] is False
    assert params["estimates"]["default"] is None
    assert params["warming"]["type"] is float
    assert params["warming"]["default"] == pytest.approx(2.5)


def test_registry_get_cli_params_excludes_internal_fields():
    """Job bookkeeping fields and the shared config are never options"""
    test_registry = CommandRegistry()
    param_names = [p["name"] for p in test_registry.get_cli_params(KayaCommand)]

    assert param_names == ["scenario"]
    for excluded_field in EXCLUDED_FIELDS:
        assert excluded_field not in param_names
    assert "config" in EXCLUDED_FIELDS


def test_registry_get_cli_params_custom_command():
    """Custom fields keep their types and defaults"""
    test_registry = CommandRegistry()

    @dataclass
    class CustomCommand(Command):
        custom_field: str = "default"
        optional_field: Optional[str] = None
        numeric_field: float = 42.0

    params = {p["name"]: p for p in test_registry.get_cli_params(CustomCommand)}

    assert set(params) == {"custom_field", "optional_field", "numeric_field"}
    assert all(p["required"] is False for p in params.values())
    assert params["optional_field"]["type"] is str
    assert abs(params["numeric_field"]["default"] - 42.0) < 1e-9


def test_registry_global_instance():
    """Importing the commands module registers every subcommand"""
    assert set(registry.get_all_commands()) == {
        "kaya",
        "simulate",
        "efficacy",
        "impacts",
        "cba",
        "netben",
        "npv",
    }
    assert registry.get_command_class("impacts") is ImpactsCommand
