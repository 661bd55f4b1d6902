"""
.. module:: _runtime_config
   :platform: Unix
   :synopsis: Packaged defaults, user config overlay and named presets.

"""
import logging
import os

import yaml

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = os.path.join(os.path.dirname(__file__),
                                   'default-scorenet-config.yml')

# keys a user file may only update entry by entry
NESTED_KEYS = ('spelling-table', 'penalty-presets')


def _read_yaml(config_file):
    """Read yaml file."""
    with open(config_file, 'r') as file:
        cfg = yaml.safe_load(file)

    return cfg or {}


def get_run_configuration(config_file="defaults"):
    """
    Get runtime configuration settings.

    Read the packaged defaults, then replace them with the values of
    the user config file, if one is given.

    Parameters
    ----------
    config_file: str
        Path to a user yaml or key=value file, or ``"defaults"``.

    Returns
    -------
    dict:
        The merged configuration.
    """
    defaults = _read_yaml(DEFAULT_CONFIG_FILE)

    if config_file is None or config_file == "defaults":
        return defaults

    config_file = _normalize_path(config_file)
    if not os.path.exists(config_file):
        raise FileNotFoundError(
            f"get_run_configuration:\tconfig file {config_file} "
            "does not exist")
    logger.info("get_run_configuration:\tusing parameters from %s",
                config_file)
    user_cfg = _read_user_config(config_file)

    return merge_configuration(defaults, user_cfg)


def _read_user_config(config_file):
    """
    Read a user config file.

    Either a yaml mapping or plain ``key=value`` lines, one setting per
    line; values are read as yaml scalars (``penalty=2.8`` gives a
    float, ``spelling-table={8: bVI}`` a mapping). Blank lines and
    lines starting with ``#`` are skipped.
    """
    with open(config_file, 'r') as file:
        text = file.read()
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError:
        cfg = text
    if cfg is None:
        return {}
    if isinstance(cfg, dict):
        return cfg

    cfg = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        if not sep or not key.strip():
            raise ValueError(f"_read_user_config:\t{config_file} line "
                             f"{number} is neither 'key: value' nor "
                             f"'key=value': {line}")
        cfg[key.strip()] = yaml.safe_load(value.strip())

    return cfg


def merge_configuration(defaults, user_cfg):
    """Overlay user settings on the defaults; unknown keys are refused."""
    merged = dict(defaults)
    for elem, value in user_cfg.items():
        if elem not in defaults:
            raise KeyError(f"merge_configuration:\tunknown config key {elem}")
        if elem in NESTED_KEYS and isinstance(value, dict):
            nested = dict(defaults[elem])
            nested.update(value)
            merged[elem] = nested
        else:
            merged[elem] = value

    return merged


def load_preset(name, preset_dir=None):
    """
    Load a named preset from the key_files directory.

    A preset holds ``penalty``, ``filter``, ``annotation`` and
    ``global-key`` entries for one corpus movement.
    """
    if preset_dir is None:
        preset_dir = os.path.join(os.path.dirname(os.path.dirname(__file__)),
                                  'key_files')
    preset_file = os.path.join(_normalize_path(preset_dir), f"{name}.yml")
    if not os.path.exists(preset_file):
        raise KeyError(f"load_preset:\tno preset named {name} "
                       f"in {preset_dir}")
    preset = _read_yaml(preset_file)
    annotation = preset.get('annotation')
    if annotation and not os.path.isabs(annotation):
        preset['annotation'] = os.path.join(os.path.dirname(preset_file),
                                            annotation)

    return preset


def _normalize_path(path):
    """Normalize paths.

    Expand ~ character and environment variables and convert path to absolute.

    Parameters
    ----------
    path: str
        Original path

    Returns
    -------
    str:
        Normalized path
    """
    if path is None:
        return None
    return os.path.abspath(os.path.expanduser(os.path.expandvars(path)))
