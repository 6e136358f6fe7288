"""
Config-file and value parsing for the htb command line.

Config files are flat `key = value` lines grouped under `[section]`
headers; `#` starts a comment. Keys resolve against the option registry:
exact match on ids, aliases and abbreviations first, fuzzy match second.
Unknown keys and values raise ConfigError with "did you mean" suggestions.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field
from rapidfuzz import fuzz, process

from ..core.enums import AlgorithmName
from ..core.errors import ConfigError
from .options import SECTIONS, OptionWord, get_all_options

logger = logging.getLogger(__name__)

FUZZY_THRESHOLD = 80.0
SUGGESTION_THRESHOLD = 50.0

ALGORITHM_ALIASES: Dict[str, AlgorithmName] = {
    "medpe": AlgorithmName.MEDPE,
    "med-pe": AlgorithmName.MEDPE,
    "med_pe": AlgorithmName.MEDPE,
    "crtm_style_ucb": AlgorithmName.CRTM_STYLE_UCB,
    "crtm-style-ucb": AlgorithmName.CRTM_STYLE_UCB,
    "crtm": AlgorithmName.CRTM_STYLE_UCB,
    "ucb": AlgorithmName.CRTM_STYLE_UCB,
}


# ==================== SUGGESTIONS ====================


def suggest(text: str, choices: Sequence[str], limit: int = 3) -> List[str]:
    """Closest choices to text, best first."""
    matches = process.extract(text.lower(), list(choices), scorer=fuzz.WRatio, limit=limit)
    return [match[0] for match in matches if match[1] >= SUGGESTION_THRESHOLD]


def unknown(kind: str, text: str, choices: Sequence[str]) -> ConfigError:
    """ConfigError for an unrecognized name, with suggestions when there are any."""
    suggestions = suggest(text, choices)
    message = f"unknown {kind} '{text}'"
    if suggestions:
        message += f". Did you mean: {', '.join(suggestions)}?"
    return ConfigError(message, suggestions)


# ==================== OPTION RECOGNITION ====================


class OptionRecognizer:
    """Recognizes option keys using exact and fuzzy matching."""

    def __init__(self, fuzzy_threshold: float = FUZZY_THRESHOLD):
        self.fuzzy_threshold = fuzzy_threshold
        self.registry = get_all_options()
        self.alias_to_id: Dict[str, str] = {}
        for option_id, option in self.registry.items():
            self.alias_to_id[option_id.lower()] = option_id
            for alias in option.aliases + option.abbreviations:
                self.alias_to_id[alias.lower()] = option_id

    def recognize(self, key: str) -> Tuple[OptionWord, float]:
        """
        Resolve a key to its option.

        Returns:
            (option, confidence) with confidence 100 for exact matches

        Raises:
            ConfigError: No option scores above the fuzzy threshold
        """
        lowered = key.strip().lower().replace("-", "_")
        for candidate in (key.strip().lower(), lowered):
            if candidate in self.alias_to_id:
                return self.registry[self.alias_to_id[candidate]], 100.0

        match = process.extractOne(lowered, list(self.alias_to_id), scorer=fuzz.WRatio)
        if match and match[1] >= self.fuzzy_threshold:
            option = self.registry[self.alias_to_id[match[0]]]
            logger.warning("config key '%s' read as '%s' (score %.0f)", key, option.id, match[1])
            return option, float(match[1])
        raise unknown("option", key, list(self.registry))


# ==================== VALUE PARSING ====================


def parse_algorithm(text: str) -> AlgorithmName:
    key = text.strip().lower()
    if key in ALGORITHM_ALIASES:
        return ALGORITHM_ALIASES[key]
    raise unknown("algorithm", text, list(ALGORITHM_ALIASES))


def parse_value(option: OptionWord, raw: Any) -> Any:
    """
    Convert raw text (or an already-typed flag value) to the option's type.

    Raises:
        ConfigError: The text does not parse or is not an allowed choice
    """
    if raw is None:
        return None
    text = str(raw).strip()
    try:
        if option.kind == "int":
            return int(text)
        if option.kind == "float":
            return float(text)
        if option.kind == "path":
            return Path(text).expanduser()
        if option.kind == "int_list":
            if isinstance(raw, (list, tuple)):
                return [int(v) for v in raw]
            return [int(part) for part in text.replace(" ", "").split(",") if part]
        if option.kind == "algorithm_list":
            parts = raw if isinstance(raw, (list, tuple)) else text.split(",")
            return [parse_algorithm(str(part)) for part in parts if str(part).strip()]
        if option.kind == "choice":
            value = text.lower()
            if value not in option.choices:
                raise unknown(f"value for '{option.id}'", text, option.choices)
            return value
        return text
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {option.kind} for '{option.id}': {text!r}") from exc


# ==================== CONFIG FILES ====================


class ParsedConfig(BaseModel):
    """Values read from a config file, keyed by option id."""

    path: Optional[Path] = None
    values: Dict[str, Any] = Field(default_factory=dict)
    sources: Dict[str, str] = Field(default_factory=dict, description="option id -> 'file:line'")


class ConfigFileParser:
    """Parser for flat key = value config files with [section] headers."""

    def __init__(self, recognizer: Optional[OptionRecognizer] = None):
        self.recognizer = recognizer or OptionRecognizer()

    def parse_text(self, text: str, origin: str = "<config>") -> ParsedConfig:
        """
        Parse config text.

        Raises:
            ConfigError: Unknown section or key, misplaced key, malformed line
                or invalid value; the message names origin and line
        """
        result = ParsedConfig()
        section: Optional[str] = None
        for lineno, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            where = f"{origin}:{lineno}"
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1].strip().lower()
                if name not in SECTIONS:
                    error = unknown("section", name, SECTIONS)
                    raise ConfigError(f"{where}: {error.message}", error.suggestions)
                section = name
                continue
            if "=" not in line:
                raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            try:
                option, _ = self.recognizer.recognize(key)
                if section is not None and option.section != section:
                    raise ConfigError(f"'{option.id}' belongs to [{option.section}], not [{section}]")
                result.values[option.id] = parse_value(option, value.strip("\"'"))
            except ConfigError as exc:
                raise ConfigError(f"{where}: {exc.message}", exc.suggestions) from None
            result.sources[option.id] = where
        return result

    def parse_file(self, path: Path) -> ParsedConfig:
        """
        Raises:
            ConfigError: The file is missing or invalid
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        parsed = self.parse_text(text, origin=str(path))
        parsed.path = path
        return parsed
