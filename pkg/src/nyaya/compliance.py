"""Compliance rule engine: every draft gets a verdict before delivery.

Rules are data, one JSON record per line, evaluated with kind precedence
(blocklist, then jurisdiction guard, then grounding guard, then disclaimer
triggers) and file order within a kind. The first block short-circuits and
replaces the draft with the rule's message so nothing from the draft body
leaks. Disclaimer messages are collected into a single block that ends
with a sentinel line; a draft already carrying the sentinel never gets a
second block.

Rule policy lives in the shipped rules file, not in code: the categories
come from the engine, the concrete patterns are an editable artifact
decision.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .agents import DraftResponse
from .errors import RuleFileError

DISCLAIMER_SENTINEL = "[nyaya notice: general legal information, not legal advice]"

# queries about comparative law are exempt from the jurisdiction guard
COMPARATIVE_QUERY_TERMS = ("compare", "versus", "difference between")

# matches any in-domain substantive answer, not a specific phrase
MATCH_ANY = "*"


class RuleKind(str, Enum):
    BLOCKLIST_PATTERN = "blocklist_pattern"
    JURISDICTION_GUARD = "jurisdiction_guard"
    GROUNDING_GUARD = "grounding_guard"
    DISCLAIMER_TRIGGER = "disclaimer_trigger"


class RuleAction(str, Enum):
    BLOCK = "block"
    APPEND_DISCLAIMER = "append_disclaimer"
    ANNOTATE = "annotate"


# evaluation precedence: block kinds strictly before disclaimer kinds
KIND_ORDER = (
    RuleKind.BLOCKLIST_PATTERN,
    RuleKind.JURISDICTION_GUARD,
    RuleKind.GROUNDING_GUARD,
    RuleKind.DISCLAIMER_TRIGGER,
)


@dataclass(frozen=True)
class ComplianceRule:
    rule_id: str
    kind: RuleKind
    pattern: str
    action: RuleAction
    message: str


@dataclass(frozen=True)
class ComplianceVerdict:
    decision: str  # "pass" | "pass_with_disclaimer" | "blocked"
    fired_rules: tuple[str, ...]
    final_text: str


def load_rules(source: str | Path | Iterable[str]) -> list[ComplianceRule]:
    """Parse and validate a rules file; any defect refuses to load."""
    if isinstance(source, (str, Path)):
        try:
            lines: Iterable[str] = Path(source).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise RuleFileError(f"cannot read rules file {source}: {exc}") from exc
    else:
        lines = source
    rules: list[ComplianceRule] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RuleFileError(f"rules line {line_no}: invalid JSON: {exc.msg}") from None
        try:
            rule = ComplianceRule(
                rule_id=str(obj["rule_id"]),
                kind=RuleKind(obj["kind"]),
                pattern=str(obj.get("pattern", "")),
                action=RuleAction(obj["action"]),
                message=str(obj["message"]),
            )
        except (KeyError, ValueError) as exc:
            raise RuleFileError(f"rules line {line_no}: {exc}") from None
        if not rule.rule_id:
            raise RuleFileError(f"rules line {line_no}: empty rule_id")
        if rule.rule_id in seen_ids:
            raise RuleFileError(f"rules line {line_no}: duplicate rule_id '{rule.rule_id}'")
        if not rule.message:
            raise RuleFileError(f"rules line {line_no}: empty message")
        if rule.kind in (RuleKind.BLOCKLIST_PATTERN, RuleKind.JURISDICTION_GUARD):
            if rule.action == RuleAction.APPEND_DISCLAIMER:
                raise RuleFileError(
                    f"rules line {line_no}: {rule.kind.value} cannot append a disclaimer"
                )
            if not rule.pattern:
                raise RuleFileError(f"rules line {line_no}: {rule.kind.value} needs a pattern")
        seen_ids.add(rule.rule_id)
        rules.append(rule)
    return rules


def lint_rules(source: str | Path | Iterable[str]) -> list[str]:
    """Collect problems instead of raising; empty list means the file is valid."""
    try:
        rules = load_rules(source)
    except RuleFileError as exc:
        return [str(exc)]
    problems = []
    if not any(r.kind == RuleKind.BLOCKLIST_PATTERN for r in rules):
        problems.append("no blocklist_pattern rules present")
    if not any(r.kind == RuleKind.DISCLAIMER_TRIGGER for r in rules):
        problems.append("no disclaimer_trigger rules present")
    return problems


def _pattern_matches(pattern: str, text: str) -> bool:
    if pattern == MATCH_ANY:
        return True
    return re.search(r"(?<!\w)" + re.escape(pattern.lower()) + r"(?!\w)", text) is not None


def ends_with_disclaimer(text: str) -> bool:
    return text.rstrip().endswith(DISCLAIMER_SENTINEL)


class RuleEngine:
    """Immutable after load; validation is stateless and concurrent-safe."""

    def __init__(self, rules: Sequence[ComplianceRule]):
        self._by_kind: dict[RuleKind, list[ComplianceRule]] = {k: [] for k in RuleKind}
        for rule in rules:
            self._by_kind[rule.kind].append(rule)

    def validate(self, draft: DraftResponse) -> ComplianceVerdict:
        query_text = draft.query.lower()
        answer_text = draft.text.lower()
        fired: list[str] = []
        disclaimer_messages: list[str] = []

        # 1. blocklist: scans both the query and the draft so a malicious
        #    question blocks even when the canned answer looks harmless
        for rule in self._by_kind[RuleKind.BLOCKLIST_PATTERN]:
            if _pattern_matches(rule.pattern, query_text) or _pattern_matches(
                rule.pattern, answer_text
            ):
                if rule.action == RuleAction.BLOCK:
                    return ComplianceVerdict("blocked", (rule.rule_id,), rule.message)
                fired.append(rule.rule_id)

        # 2. jurisdiction guard: answers grounded in foreign law are blocked
        #    unless the user explicitly asked for a comparison
        comparative = any(term in query_text for term in COMPARATIVE_QUERY_TERMS)
        if not comparative:
            for rule in self._by_kind[RuleKind.JURISDICTION_GUARD]:
                if _pattern_matches(rule.pattern, answer_text):
                    if rule.action == RuleAction.BLOCK:
                        return ComplianceVerdict("blocked", (rule.rule_id,), rule.message)
                    fired.append(rule.rule_id)

        # refusals carry no legal information: pass untouched
        if draft.refusal:
            return ComplianceVerdict("pass", tuple(fired), draft.text)

        # 3. grounding guard: in-domain answers without resolvable citations
        #    must say so
        for rule in self._by_kind[RuleKind.GROUNDING_GUARD]:
            if not draft.grounded:
                fired.append(rule.rule_id)
                if rule.action == RuleAction.APPEND_DISCLAIMER:
                    disclaimer_messages.append(rule.message)

        # 4. disclaimer triggers: advice-like phrasing or the always-on
        #    substantive-answer rule
        for rule in self._by_kind[RuleKind.DISCLAIMER_TRIGGER]:
            if _pattern_matches(rule.pattern, answer_text):
                fired.append(rule.rule_id)
                if rule.action == RuleAction.APPEND_DISCLAIMER:
                    disclaimer_messages.append(rule.message)

        if not disclaimer_messages:
            return ComplianceVerdict("pass", tuple(fired), draft.text)

        if ends_with_disclaimer(draft.text):
            # a previous validation already appended the block
            return ComplianceVerdict("pass_with_disclaimer", tuple(fired), draft.text)

        unique_messages = list(dict.fromkeys(disclaimer_messages))
        block = "\n".join(["---", *unique_messages, DISCLAIMER_SENTINEL])
        return ComplianceVerdict(
            "pass_with_disclaimer", tuple(fired), draft.text + "\n\n" + block
        )
