"""Configuration loading and provider wiring.

Config files are TOML. Every key has a default, so an empty (or absent)
file is a valid hermetic setup running on the mock providers. Environment
variables FAITH_LLM_ENDPOINT, FAITH_LLM_KEY, FAITH_EMBED_ENDPOINT, and
FAITH_EMBED_KEY override the file; setting FAITH_EMBED_ENDPOINT also
switches the embedding provider to remote.

Defaults (TOML form):

    levels = 10
    workers = 4
    error_rate_threshold = 0.01
    allow_missing_semantic = false
    mock_providers = false

    [weights]
    lexical = 1.0
    semantic = 1.0
    self_eval = 1.0

    [embedding]
    kind = "mock"          # "mock" | "remote"
    endpoint = ""
    model = "hashed-bow"
    api_key = ""
    dimension = 256
    timeout = 10.0
    batch_size = 32
    max_in_flight = 8
    max_attempts = 3
    base_backoff = 0.5

    [llm]
    endpoint = ""
    model = "gpt-4"
    api_key = ""
    temperature = 0.0
    timeout = 30.0
    max_in_flight = 8
    max_attempts = 3
    base_backoff = 0.5

    [service]
    bind = "127.0.0.1:8300"
    static_dir = ""
    cors_origins = []
    max_concurrent = 16
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .fusion import DEFAULT_LEVELS, FusionWeights
from .judge import ChatClient, LlmProviderConfig, MockChatClient, RemoteChatClient
from .pipeline import Annotator
from .providers import RetryPolicy
from .semantic import EmbeddingClient, EmbeddingProviderConfig, make_embedding_client

ENV_LLM_ENDPOINT = "FAITH_LLM_ENDPOINT"
ENV_LLM_KEY = "FAITH_LLM_KEY"
ENV_EMBED_ENDPOINT = "FAITH_EMBED_ENDPOINT"
ENV_EMBED_KEY = "FAITH_EMBED_KEY"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    bind: str = "127.0.0.1:8300"
    static_dir: str = ""
    cors_origins: tuple[str, ...] = ()
    max_concurrent: int = 16

    def __post_init__(self) -> None:
        host, _, port = self.bind.rpartition(":")
        if not host or not port.isdigit() or not 0 < int(port) < 65536:
            raise ConfigError(f"bind must be host:port, got {self.bind!r}")
        if self.max_concurrent < 1:
            raise ConfigError(f"max_concurrent must be >= 1, got {self.max_concurrent}")

    @property
    def host(self) -> str:
        return self.bind.rpartition(":")[0]

    @property
    def port(self) -> int:
        return int(self.bind.rpartition(":")[2])


@dataclass(frozen=True)
class AppConfig:
    weights: FusionWeights = field(default_factory=FusionWeights.equal)
    levels: int = DEFAULT_LEVELS
    workers: int = 4
    error_rate_threshold: float = 0.01
    allow_missing_semantic: bool = False
    mock_providers: bool = False
    embedding: EmbeddingProviderConfig = field(default_factory=EmbeddingProviderConfig)
    llm: LlmProviderConfig = field(default_factory=LlmProviderConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise ConfigError(f"levels must be >= 1, got {self.levels}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not 0.0 <= self.error_rate_threshold <= 1.0:
            raise ConfigError(
                f"error_rate_threshold must be in [0, 1], got {self.error_rate_threshold}"
            )


_TOP_KEYS = {
    "levels",
    "workers",
    "error_rate_threshold",
    "allow_missing_semantic",
    "mock_providers",
    "weights",
    "embedding",
    "llm",
    "service",
}


def _section(data: Mapping, name: str, allowed: set[str]) -> dict:
    section = data.get(name, {})
    if not isinstance(section, Mapping):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {', '.join(sorted(unknown))}")
    return dict(section)


def _retry(section: Mapping) -> RetryPolicy:
    return RetryPolicy(
        max_attempts=section.get("max_attempts", 3),
        base_backoff=section.get("base_backoff", 0.5),
    )


def load_config(
    path: str | Path | None = None, env: Mapping[str, str] | None = None
) -> AppConfig:
    """Build the app config from an optional TOML file plus the environment."""
    env = os.environ if env is None else env
    data: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc

    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    weights_data = _section(data, "weights", {"lexical", "semantic", "self_eval"})
    embed_data = _section(
        data,
        "embedding",
        {
            "kind",
            "endpoint",
            "model",
            "api_key",
            "dimension",
            "timeout",
            "batch_size",
            "max_in_flight",
            "max_attempts",
            "base_backoff",
        },
    )
    llm_data = _section(
        data,
        "llm",
        {
            "endpoint",
            "model",
            "api_key",
            "temperature",
            "timeout",
            "max_in_flight",
            "max_attempts",
            "base_backoff",
        },
    )
    service_data = _section(
        data, "service", {"bind", "static_dir", "cors_origins", "max_concurrent"}
    )

    embed_endpoint = env.get(ENV_EMBED_ENDPOINT) or embed_data.get("endpoint", "")
    embed_kind = embed_data.get("kind", "mock")
    if env.get(ENV_EMBED_ENDPOINT):
        embed_kind = "remote"

    try:
        embedding = EmbeddingProviderConfig(
            kind=embed_kind,
            endpoint=embed_endpoint,
            model=embed_data.get("model", "hashed-bow"),
            api_key=env.get(ENV_EMBED_KEY) or embed_data.get("api_key", ""),
            dimension=embed_data.get("dimension", 256),
            timeout=embed_data.get("timeout", 10.0),
            batch_size=embed_data.get("batch_size", 32),
            max_in_flight=embed_data.get("max_in_flight", 8),
            retry=_retry(embed_data),
        )
        llm = LlmProviderConfig(
            endpoint=env.get(ENV_LLM_ENDPOINT) or llm_data.get("endpoint", ""),
            model=llm_data.get("model", "gpt-4"),
            api_key=env.get(ENV_LLM_KEY) or llm_data.get("api_key", ""),
            temperature=llm_data.get("temperature", 0.0),
            timeout=llm_data.get("timeout", 30.0),
            max_in_flight=llm_data.get("max_in_flight", 8),
            retry=_retry(llm_data),
        )
        service = ServiceConfig(
            bind=service_data.get("bind", "127.0.0.1:8300"),
            static_dir=service_data.get("static_dir", ""),
            cors_origins=tuple(service_data.get("cors_origins", ())),
            max_concurrent=service_data.get("max_concurrent", 16),
        )
        weights = FusionWeights(
            lexical=weights_data.get("lexical", 1.0),
            semantic=weights_data.get("semantic", 1.0),
            self_eval=weights_data.get("self_eval", 1.0),
        )
        return AppConfig(
            weights=weights,
            levels=data.get("levels", DEFAULT_LEVELS),
            workers=data.get("workers", 4),
            error_rate_threshold=data.get("error_rate_threshold", 0.01),
            allow_missing_semantic=data.get("allow_missing_semantic", False),
            mock_providers=data.get("mock_providers", False),
            embedding=embedding,
            llm=llm,
            service=service,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def apply_overrides(
    config: AppConfig,
    *,
    weights: str | None = None,
    levels: int | None = None,
    workers: int | None = None,
    mock_providers: bool = False,
) -> AppConfig:
    """Apply CLI-level overrides on top of a loaded config."""
    if weights is not None:
        parts = weights.split(",")
        if len(parts) != 3:
            raise ConfigError("weights must be three comma-separated numbers: L,S,J")
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"invalid weights {weights!r}") from exc
        try:
            config = replace(config, weights=FusionWeights(*values))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if levels is not None:
        config = replace(config, levels=levels)
    if workers is not None:
        config = replace(config, workers=workers)
    if mock_providers:
        config = replace(config, mock_providers=True)
    return config


def make_embedder(config: AppConfig) -> EmbeddingClient:
    if config.mock_providers:
        return make_embedding_client(
            EmbeddingProviderConfig(kind="mock", dimension=config.embedding.dimension)
        )
    return make_embedding_client(config.embedding)


def make_generation_client(config: AppConfig) -> ChatClient:
    """Chat client for generation; raises when nothing is configured."""
    if config.mock_providers:
        return MockChatClient()
    if not config.llm.endpoint:
        raise ConfigError(
            "no LLM endpoint configured; set [llm].endpoint, "
            f"{ENV_LLM_ENDPOINT}, or use --mock-providers"
        )
    return RemoteChatClient(config.llm)


def make_judge_client(config: AppConfig) -> ChatClient | None:
    """Chat client for grading; None leaves the self-eval component off."""
    if config.mock_providers:
        return MockChatClient()
    if not config.llm.endpoint:
        return None
    return RemoteChatClient(config.llm)


def make_annotator(config: AppConfig) -> Annotator:
    return Annotator(
        weights=config.weights,
        embedder=make_embedder(config),
        judge_client=make_judge_client(config),
        levels=config.levels,
        judge_retry=config.llm.retry,
        judge_temperature=config.llm.temperature,
        allow_missing_semantic=config.allow_missing_semantic,
    )
