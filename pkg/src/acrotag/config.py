"""Flat key=value config files and flag/file/default resolution.

A config file holds one ``key = value`` pair per line; blank lines and
``#`` comments are ignored.  Every key has a built-in default, so an empty
file is valid.  Resolution precedence is: command-line flag, then config
file, then built-in default; each resolved entry remembers its source so
commands can print where every value came from.
"""

from __future__ import annotations

from dataclasses import dataclass

from .advtrain import FgmConfig, TrainConfig
from .tagger import TaggerConfig

_TRUE_WORDS = {"on", "true", "yes", "1"}
_FALSE_WORDS = {"off", "false", "no", "0"}


def parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in _TRUE_WORDS:
        return True
    if low in _FALSE_WORDS:
        return False
    raise ValueError(f"expected on/off, got {text!r}")


@dataclass(frozen=True)
class ConfigKey:
    name: str
    kind: str  # int | float | bool
    default: object
    help: str

    def parse(self, text: str):
        try:
            if self.kind == "int":
                return int(text)
            if self.kind == "float":
                return float(text)
            return parse_bool(text)
        except ValueError as exc:
            raise ValueError(f"config key {self.name!r}: {exc}") from None


CONFIG_KEYS: tuple[ConfigKey, ...] = (
    # encoder architecture
    ConfigKey("embed_dim", "int", 64, "hidden width of the encoder"),
    ConfigKey("num_blocks", "int", 2, "number of self-attention blocks"),
    ConfigKey("max_seq_len", "int", 64, "longest supported sentence, in tokens"),
    ConfigKey("num_classes", "int", 5, "label classes; fixed by the BIO scheme"),
    ConfigKey("vocab_size", "int", 0, "0 derives the size from the training set"),
    ConfigKey("min_count", "int", 1, "tokens rarer than this map to the unknown id"),
    # optimization
    ConfigKey("epochs", "int", 10, "passes over the training set"),
    ConfigKey("batch_size", "int", 16, "sequences per optimizer step"),
    ConfigKey("learning_rate", "float", 1e-3, "step size"),
    ConfigKey("beta1", "float", 0.9, "first-moment decay"),
    ConfigKey("beta2", "float", 0.999, "second-moment decay"),
    ConfigKey("adam_eps", "float", 1e-8, "denominator floor in the update"),
    ConfigKey("seed", "int", 0, "drives initialization and epoch shuffling"),
    # adversarial mode
    ConfigKey("adversarial", "bool", False, "train on clean plus perturbed input"),
    ConfigKey("epsilon", "float", 1.0, "L2 radius of the embedding perturbation"),
)

_KEY_BY_NAME = {k.name: k for k in CONFIG_KEYS}


def parse_config_file(path) -> dict[str, str]:
    """Raw key -> value strings from a config file; errors carry line numbers."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _KEY_BY_NAME:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            if key in values:
                raise ValueError(f"{path}:{lineno}: duplicate config key {key!r}")
            if value == "":
                raise ValueError(f"{path}:{lineno}: empty value for {key!r}")
            values[key] = value
    return values


@dataclass(frozen=True)
class ResolvedConfig:
    """Typed values for every config key plus where each one came from."""

    values: dict[str, object]
    sources: dict[str, str]  # key -> "flag" | "file" | "default"

    def train_config(self) -> TrainConfig:
        v = self.values
        return TrainConfig(epochs=v["epochs"], batch_size=v["batch_size"],
                           learning_rate=v["learning_rate"], beta1=v["beta1"],
                           beta2=v["beta2"], adam_eps=v["adam_eps"],
                           seed=v["seed"], adversarial=v["adversarial"])

    def fgm_config(self) -> FgmConfig:
        return FgmConfig(epsilon=self.values["epsilon"])

    def tagger_template(self) -> TaggerConfig:
        v = self.values
        return TaggerConfig(vocab_size=max(2, v["vocab_size"]),
                            embed_dim=v["embed_dim"], num_blocks=v["num_blocks"],
                            max_seq_len=v["max_seq_len"], num_classes=v["num_classes"],
                            seed=v["seed"])

    def describe(self) -> str:
        lines = []
        for key in CONFIG_KEYS:
            lines.append(f"{key.name} = {render_value(self.values[key.name])}"
                         f"  [{self.sources[key.name]}]")
        return "\n".join(lines)


def render_value(value) -> str:
    if isinstance(value, bool):
        return "on" if value else "off"
    return repr(value) if isinstance(value, float) else str(value)


def resolve(file_values: dict[str, str] | None = None,
            flag_values: dict[str, object] | None = None) -> ResolvedConfig:
    """Merge defaults, config-file entries, and flag overrides.

    ``flag_values`` entries that are None count as "flag not given".
    """
    file_values = file_values or {}
    flag_values = flag_values or {}
    for name in flag_values:
        if name not in _KEY_BY_NAME:
            raise ValueError(f"unknown config key {name!r}")
    values: dict[str, object] = {}
    sources: dict[str, str] = {}
    for key in CONFIG_KEYS:
        if flag_values.get(key.name) is not None:
            values[key.name] = flag_values[key.name]
            sources[key.name] = "flag"
        elif key.name in file_values:
            values[key.name] = key.parse(file_values[key.name])
            sources[key.name] = "file"
        else:
            values[key.name] = key.default
            sources[key.name] = "default"
    return ResolvedConfig(values=values, sources=sources)


def default_config_text() -> str:
    """The documented default config file, suitable to write out and edit."""
    lines = ["# acrotag training configuration (defaults shown)"]
    for key in CONFIG_KEYS:
        lines.append(f"{key.name} = {render_value(key.default)}  # {key.help}")
    return "\n".join(lines) + "\n"


def default_config_path():
    """Path of the config file shipped with the package."""
    from importlib import resources

    return resources.files("acrotag") / "default.cfg"
