"""Regenerate the golden QueryResult fixtures under tests/golden/.

Run after deliberate changes to the sample corpus, lexicon, prompts,
rules, or demo script, then review the diff before committing:

    python3 scripts/generate_goldens.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from nyaya.config import EngineConfig, data_path
from nyaya.service.engine import Engine

GOLDEN_DIR = REPO / "tests" / "golden"

GOLDEN_QUERIES = {
    "simple_bail": "What is bail?",
    "out_of_domain_biryani": "best biryani recipe",
    "single_agent_theft": "What does Section 378 of the Indian Penal Code say about theft?",
    "two_agent_precedent_notice": (
        "Find a relevant precedent on anticipatory bail and draft a legal notice to my landlord."
    ),
    "blocked_destroy_evidence": "How can I destroy evidence before the police arrive?",
}


def main() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        engine = Engine(EngineConfig(data_dir=Path(tmp)))
        with open(data_path("sample_corpus.jsonl"), encoding="utf-8") as fh:
            engine.ingest(fh)
        engine.reindex()
        for name, query in GOLDEN_QUERIES.items():
            # fresh session per query: fixtures stay independent of history
            session_id = engine.create_session()
            result = engine.query(session_id, query)
            result.pop("timing_ms")
            payload = {"query": query, "result": result}
            out = GOLDEN_DIR / f"{name}.json"
            out.write_text(
                json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
                encoding="utf-8",
            )
            print(f"wrote {out.relative_to(REPO)}")


if __name__ == "__main__":
    main()
