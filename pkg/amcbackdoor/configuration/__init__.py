from .config import Config, ConfigError, deep_update, unflatten
