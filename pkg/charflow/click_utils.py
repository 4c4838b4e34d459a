"""
Provide helper functions for command line parsing with click
"""

import click


class NaturalOrderGroup(click.Group):
    """Command group trying to list subcommands in the order they were added.

    With decorator, use::

        @click.group(cls=NaturalOrderGroup)
    """
    def list_commands(self, ctx):
        """List command names as they are in commands dict.

        If the dict is OrderedDict, it will preserve the order commands
        were added.
        """
        return self.commands.keys()


class CommaSeparatedText(click.ParamType):
    """
    Comma separated text
    """
    def __init__(self, dtype=click.STRING, simplify=False, length=None):
        self.dtype = dtype
        self.dtype_name = _get_type_name(dtype)
        self.simplify = simplify
        self.length = length
        if length and length <= 3:
            self.name = ','.join([f'{self.dtype_name}'] * length)
        else:
            self.name = f'{self.dtype_name}[,{self.dtype_name}...]'

    def convert(self, value, param, ctx):
        if value is None or isinstance(value, (list, tuple)):
            return value
        try:
            converted = [self.dtype(token.strip()) for token in str(value).split(',')]
        except ValueError:
            self.fail(f'{value} is not a valid comma separated list of {self.dtype_name}',
                      param, ctx)
        if self.length and len(converted) != self.length:
            self.fail(f'{value} is not a valid comma separated list of length {self.length}',
                      param, ctx)
        if self.simplify and len(converted) == 1:
            converted = converted[0]
        return converted


class Dictionary(click.ParamType):
    """
    Text to be parsed as key:value pairs, e.g. "k:1.5,a:pi"

    Values that read as numbers become floats; others stay text and are
    evaluated later as constant expressions.
    """
    def __init__(self, keys=None):
        self.name = 'TEXT:VAL[,TEXT:VAL...]'
        self.keys = keys

    def convert(self, value, param, ctx):
        if isinstance(value, dict):
            return value
        converted = {}
        for token in str(value).split(','):
            key, sep, val = token.partition(':')
            key, val = key.strip(), val.strip()
            if not sep or not key or not val:
                self.fail(f'{value} is not a valid key:value list', param, ctx)
            if isinstance(self.keys, (list, tuple)) and key not in self.keys:
                self.fail(f'{key} is not a valid key ({self.keys})', param, ctx)
            try:
                val = float(val)
            except ValueError:
                pass
            converted[key] = val
        return converted


def _get_type_name(obj):
    try:
        return getattr(obj, 'name')
    except AttributeError:
        return getattr(obj, '__name__', 'text')


def valid_positive(ctx, param, value):
    if value is not None and not value > 0:
        raise click.BadParameter(f'must be positive, got {value}', ctx, param)
    return value


def valid_times(ctx, param, value):
    if value is None:
        return value
    if any(t < 0 for t in value):
        raise click.BadParameter('output times must not be negative', ctx, param)
    return sorted(set(value))
