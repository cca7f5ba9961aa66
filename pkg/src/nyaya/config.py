"""Engine configuration, resolved from environment variables with sane defaults.

Environment variables:
    NYAYA_PORT            HTTP port for `nyaya serve` (default 8080)
    NYAYA_DATA_DIR        session storage directory (default ./nyaya_data)
    NYAYA_RULES_PATH      compliance rules file (default: packaged rules)
    NYAYA_CONFIG_DIR      overrides packaged lexicon/markers/prompts/rules
    NYAYA_LLM_PROVIDER    remote | scripted (default scripted)
    NYAYA_LLM_BASE_URL    chat completions endpoint base URL
    NYAYA_LLM_MODEL       remote model name
    NYAYA_LLM_API_KEY     bearer token for the remote provider
    NYAYA_LLM_SCRIPT      script file for the scripted provider
    NYAYA_EMBED_PROVIDER  local | remote (default local)
    NYAYA_EMBED_BASE_URL  embeddings endpoint base URL
    NYAYA_EMBED_MODEL     remote embedding model name
    NYAYA_EMBED_API_KEY   bearer token for the embeddings provider
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


@dataclass
class EngineConfig:
    # embedding / index
    dimension: int = 256
    chunk_tokens: int = 1000
    overlap_tokens: int = 200
    # retrieval
    retrieval_k: int = 5
    min_score: float = 0.25
    context_budget: int = 3000
    # classifier
    w_lex: float = 0.5
    w_emb: float = 0.5
    classify_threshold: float = 0.15
    # session
    session_window: int = 6
    data_dir: Path = field(default_factory=lambda: Path("nyaya_data"))
    # service
    port: int = 8080
    # providers
    llm_provider: str = "scripted"
    llm_base_url: str = ""
    llm_model: str = ""
    llm_api_key: str = ""
    llm_script: str = ""
    embed_provider: str = "local"
    embed_base_url: str = ""
    embed_model: str = ""
    embed_api_key: str = ""
    rules_path: str = ""

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "EngineConfig":
        e = os.environ if env is None else env
        cfg = cls()
        cfg.port = int(e.get("NYAYA_PORT", cfg.port))
        cfg.data_dir = Path(e.get("NYAYA_DATA_DIR", str(cfg.data_dir)))
        cfg.rules_path = e.get("NYAYA_RULES_PATH", cfg.rules_path)
        cfg.llm_provider = e.get("NYAYA_LLM_PROVIDER", cfg.llm_provider)
        cfg.llm_base_url = e.get("NYAYA_LLM_BASE_URL", cfg.llm_base_url)
        cfg.llm_model = e.get("NYAYA_LLM_MODEL", cfg.llm_model)
        cfg.llm_api_key = e.get("NYAYA_LLM_API_KEY", cfg.llm_api_key)
        cfg.llm_script = e.get("NYAYA_LLM_SCRIPT", cfg.llm_script)
        cfg.embed_provider = e.get("NYAYA_EMBED_PROVIDER", cfg.embed_provider)
        cfg.embed_base_url = e.get("NYAYA_EMBED_BASE_URL", cfg.embed_base_url)
        cfg.embed_model = e.get("NYAYA_EMBED_MODEL", cfg.embed_model)
        cfg.embed_api_key = e.get("NYAYA_EMBED_API_KEY", cfg.embed_api_key)
        return cfg


def data_path(name: str) -> Path:
    """Resolve a bundled data file, honoring the NYAYA_CONFIG_DIR override."""
    override = os.environ.get("NYAYA_CONFIG_DIR")
    if override:
        candidate = Path(override) / name
        if candidate.exists():
            return candidate
    return Path(str(resources.files("nyaya").joinpath("data", name)))
