"""
configuration handling.

defaults and their JSON schema ship with the package, experiment files
override them with flat dotted keys such as ``"attack.kappa_db": -15``.
"""

import copy
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import jsonschema

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """ unknown key or invalid value in a configuration """


def unflatten(flat: Mapping[str, Any]) -> Dict[str, Any]:
    """
    turn ``{'a.b': 1, 'a.c': 2}`` into ``{'a': {'b': 1, 'c': 2}}``.
    nested dictionaries are accepted as values and merged.
    """
    tree: Dict[str, Any] = {}
    for key, value in flat.items():
        parts = str(key).split('.')
        node = tree
        for depth, part in enumerate(parts[:-1]):
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(
                    f"key '{key}' conflicts with the value already given "
                    f"for '{'.'.join(parts[:depth + 1])}'")
            node = child
        leaf = parts[-1]
        if isinstance(value, dict):
            node[leaf] = deep_update(node.get(leaf, {}), value)
        else:
            node[leaf] = value
    return tree


def deep_update(base: Mapping[str, Any],
                update: Mapping[str, Any]) -> Dict[str, Any]:
    """ return a copy of ``base`` recursively updated with ``update`` """
    merged = copy.deepcopy(dict(base))
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_update(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _describe(error: jsonschema.ValidationError) -> str:
    path = '.'.join(str(p) for p in error.absolute_path)
    if error.validator == 'additionalProperties':
        known = set(error.schema.get('properties', {}))
        extra = sorted(set(error.instance) - known)
        keys = [f'{path}.{e}' if path else e for e in extra]
        return f"unknown configuration key(s): {', '.join(keys)}"
    return f"invalid value for '{path or '<root>'}': {error.message}"


class Config:
    """
    configuration of an experiment.

    values are read with dotted keys, ``config['attack.y_tar']``, or
    section by section, ``config['attack']``.
    """

    config_file_name = 'amcbackdoorrc.json'
    schema_file_name = 'amcbackdoorrc_schema.json'
    default_file_name = Path(__file__).parent / config_file_name
    schema_default_file_name = Path(__file__).parent / schema_file_name

    def __init__(self, path: Optional[Union[str, Path]] = None):
        with open(self.schema_default_file_name) as f:
            self.schema = json.load(f)
        self.defaults = self.load_default()
        self.current_config = copy.deepcopy(self.defaults)
        self.current_config_path: Optional[Path] = None
        if path is not None:
            self.update_config(path)

    def load_default(self) -> Dict[str, Any]:
        with open(self.default_file_name) as f:
            defaults = json.load(f)
        self.validate(defaults)
        return defaults

    def update_config(self, path: Union[str, Path]) -> Dict[str, Any]:
        """ merge the flat dotted-key JSON file at ``path`` """
        path = Path(path)
        try:
            with open(path) as f:
                overrides = json.load(f)
        except json.JSONDecodeError as err:
            raise ConfigError(f'{path} is not valid JSON: {err}') from err
        if not isinstance(overrides, dict):
            raise ConfigError(f'{path} must hold a JSON object')
        self.update(overrides)
        self.current_config_path = path
        log.info(f'configuration updated from {path}')
        return self.current_config

    def update(self, overrides: Mapping[str, Any]) -> Dict[str, Any]:
        merged = deep_update(self.current_config, unflatten(overrides))
        self.validate(merged)
        self.current_config = merged
        return merged

    def validate(self, config: Mapping[str, Any]) -> None:
        validator = jsonschema.Draft7Validator(self.schema)
        errors = sorted(validator.iter_errors(config),
                        key=lambda e: [str(p) for p in e.absolute_path])
        if errors:
            raise ConfigError(_describe(errors[0]))

        n_classes = len(config['dataset']['classes'])
        if config['attack']['y_tar'] >= n_classes:
            raise ConfigError(
                f"invalid value for 'attack.y_tar': "
                f"{config['attack']['y_tar']} is not below the number of "
                f"classes ({n_classes})")

    def __getitem__(self, key: str) -> Any:
        node: Any = self.current_config
        for part in key.split('.'):
            if not isinstance(node, dict) or part not in node:
                raise KeyError(key)
            node = node[part]
        return copy.deepcopy(node)

    def fingerprint(self, *sections: str) -> str:
        """
        sha256 of the canonical JSON of the given sections or dotted keys
        """
        content = {s: self[s] for s in sorted(sections)}
        text = json.dumps(content, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(text.encode()).hexdigest()

    def save(self, path: Union[str, Path]) -> None:
        with open(path, 'w') as f:
            json.dump(self.current_config, f, indent=4, sort_keys=True)
            f.write('\n')

    def __repr__(self) -> str:
        source = self.current_config_path or 'defaults'
        return f'<Config from {source}>'
