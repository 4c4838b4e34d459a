"""
Provide helper functions for constructing sub-commands
"""

import click

from .cmd_options import CMD_OPTIONS
from .lib._errors import CharflowError, ConfigError, ExprError


class ConfigFailure(click.ClickException):
    """Bad problem definition or run parameters."""
    exit_code = 2


class SolverFailure(click.ClickException):
    """The solver could not complete the run."""
    exit_code = 3


def make_subcmd(cmd_name, func, cmd_desc, arg_desc, opt_set=None):
    """
    Factory function that returns a sub-command function
    """
    opt_set = opt_set if opt_set else cmd_name
    options = CMD_OPTIONS[opt_set]
    option_spec = [click.command(cmd_name.replace('_', '-'))]
    option_spec.extend(options)

    def add_docstring(cmd_desc, arg_desc):
        def docstring_dec(obj):
            obj.__doc__ = obj.__doc__.format(
                cmd_desc=cmd_desc, arg_desc=arg_desc)
            return obj
        return docstring_dec

    @add_options(option_spec)
    @add_docstring(cmd_desc, arg_desc)
    def cmd(**kwargs):
        """{cmd_desc}\n\n\b\n{arg_desc}"""
        try:
            func(**kwargs)
        except (ConfigError, ExprError) as err:
            raise ConfigFailure(str(err)) from err
        except CharflowError as err:
            raise SolverFailure(f'{type(err).__name__}: {err}') from err
        return 0

    return cmd


def add_options(options):
    """
    Returns a decorator to group multiple click decorators
    """
    def _add_options(func):
        for option in reversed(options):
            func = option(func)
        return func
    return _add_options
