"""Plugins with the parameter sets of the two measured configurations.  Every
module defines a class ``Preset``, derived from `utils.case.CasePreset`.
"""

import importlib, re
from ..utils import InvalidInputError


def load_preset(name):
    """Returns the preset with the given name.

    :param str name: name of the preset module, e.g. ``"case1"``

    :rtype: `utils.case.CasePreset`

    :raises InvalidInputError: if there is no such preset
    """
    if not re.fullmatch(r"[a-z][a-z0-9_]*", name) or name == "utils":
        raise InvalidInputError(f"invalid preset name {name!r}")
    try:
        module = importlib.import_module("." + name, __name__)
    except ModuleNotFoundError as error:
        if error.name != f"{__name__}.{name}":
            raise
        raise InvalidInputError(f"unknown preset {name!r}")
    return module.Preset()
