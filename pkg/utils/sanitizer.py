import re


def strip_quotes(value):
    """Removes one pair of surrounding double quotes."""
    if len(value) >= 2 and value.startswith('"') and value.endswith('"'):
        return value[1:-1]
    return value


def filename_argument(value, separator="_"):
    """Makes a coordinate safe to embed in a template filename."""
    value = re.sub(r'\s+', separator, strip_quotes(value))
    return value.replace('/', separator)
