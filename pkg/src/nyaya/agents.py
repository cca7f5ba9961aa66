"""Main orchestrator and the four sub-agents.

The orchestrator classifies the query, short-circuits out-of-domain input
with a fixed refusal, otherwise retrieves context once, routes on intent
markers, and either answers directly (simple) or runs the selected
sub-agents sequentially in a fixed order and consolidates their sections.

Sub-agents share the single retrieved context; answers cite passages as
[n] markers which are mapped back to the context to build the citation
trail. An out-of-range marker is ignored rather than invented.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .classifier import Classification, DomainClassifier, DomainLabel
from .errors import GatewayError, RetrievalUnavailableError, RuleFileError
from .llm_gateway import ChatGateway, ChatMessage, ChatRequest
from .retrieval import EMPTY_CONTEXT, Passage, RetrievedContext, Retriever


class AgentKind(str, Enum):
    RESEARCH = "research"
    CASE_ANALYSIS = "case_analysis"
    SUMMARIZATION = "summarization"
    DRAFTING = "drafting"


# sub-agents always execute in this order
EXECUTION_ORDER = (
    AgentKind.RESEARCH,
    AgentKind.CASE_ANALYSIS,
    AgentKind.SUMMARIZATION,
    AgentKind.DRAFTING,
)

SECTION_HEADINGS = {
    AgentKind.RESEARCH: "Legal Research",
    AgentKind.CASE_ANALYSIS: "Case Analysis",
    AgentKind.SUMMARIZATION: "Summary",
    AgentKind.DRAFTING: "Draft",
}

_CITATION_MARKER = re.compile(r"\[(\d+)\]")
_FINAL_QUESTION = re.compile(r"\?(?=\s|$)")


@dataclass(frozen=True)
class RoutingDecision:
    classification: Classification
    complexity: str  # "simple" | "complex"
    selected_agents: tuple[AgentKind, ...]
    rationale_tags: tuple[str, ...]


@dataclass(frozen=True)
class AgentTask:
    task_id: str
    agent_kind: AgentKind
    query: str
    context: RetrievedContext
    session_excerpt: tuple[tuple[str, str], ...]  # (user_text, final_text) pairs


@dataclass(frozen=True)
class Citation:
    chunk_id: str
    source_citation: str


@dataclass(frozen=True)
class AgentOutput:
    task_id: str
    agent_kind: AgentKind
    answer: str
    citations: tuple[Citation, ...]
    grounded: bool


@dataclass(frozen=True)
class DraftResponse:
    """Pre-compliance answer; nothing here may reach a user unvalidated."""

    query: str
    text: str
    classification: Classification
    routing: RoutingDecision
    citations: tuple[Citation, ...]
    grounded: bool
    refusal: bool
    context: RetrievedContext = EMPTY_CONTEXT


def load_marker_table(source: str | Path | dict) -> dict[AgentKind, tuple[str, ...]]:
    """Marker table file: {"research": ["section", ...], ...}."""
    if isinstance(source, (str, Path)):
        try:
            obj = json.loads(Path(source).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise RuleFileError(f"cannot read marker table {source}: {exc}") from exc
    else:
        obj = source
    table: dict[AgentKind, tuple[str, ...]] = {}
    for kind in AgentKind:
        markers = obj.get(kind.value, [])
        if not isinstance(markers, list) or not all(isinstance(m, str) for m in markers):
            raise RuleFileError(f"marker table entry '{kind.value}' must be a list of strings")
        table[kind] = tuple(m.strip().lower() for m in markers if m.strip())
    return table


def _marker_matches(marker: str, text: str) -> bool:
    # substring, not word-boundary: "precedent" must catch "precedents"
    return marker in text


def route(
    query: str,
    classification: Classification,
    markers: Mapping[AgentKind, tuple[str, ...]],
) -> RoutingDecision:
    """Pure function of (query, classification, marker table).

    A query is complex when any marker set fires or it asks two or more
    questions; a multi-question query with no markers falls back to the
    research agent so every complex decision selects at least one agent.
    """
    text = query.lower()
    selected: list[AgentKind] = []
    tags: list[str] = []
    for kind in EXECUTION_ORDER:
        hit = False
        for marker in markers.get(kind, ()):
            if _marker_matches(marker, text):
                tags.append(marker)
                hit = True
        if hit:
            selected.append(kind)
    multi_question = len(_FINAL_QUESTION.findall(query)) >= 2
    if multi_question and not selected:
        selected.append(AgentKind.RESEARCH)
        tags.append("multi_question")
    complexity = "complex" if selected else "simple"
    return RoutingDecision(
        classification=classification,
        complexity=complexity,
        selected_agents=tuple(selected),
        rationale_tags=tuple(tags),
    )


def extract_citations(
    answer: str, passages: Sequence[Passage]
) -> tuple[tuple[Citation, ...], bool]:
    """Map [n] markers back to passages (1-based); out-of-range markers are
    dropped; duplicates keep first occurrence order."""
    seen: dict[str, Citation] = {}
    for match in _CITATION_MARKER.finditer(answer):
        n = int(match.group(1))
        if 1 <= n <= len(passages):
            passage = passages[n - 1]
            if passage.chunk_id not in seen:
                seen[passage.chunk_id] = Citation(passage.chunk_id, passage.source_citation)
    citations = tuple(seen.values())
    return citations, bool(citations)


def _format_history(excerpt: Sequence[tuple[str, str]]) -> str:
    if not excerpt:
        return "(no prior turns)"
    lines = []
    for user_text, final_text in excerpt:
        lines.append(f"User: {user_text}")
        lines.append(f"Assistant: {final_text}")
    return "\n".join(lines)


def build_system_prompt(
    template: str, context: RetrievedContext, excerpt: Sequence[tuple[str, str]]
) -> str:
    context_text = context.context_text or "(no passages retrieved)"
    return template.replace("{context}", context_text).replace(
        "{history}", _format_history(excerpt)
    )


def run_sub_agent(task: AgentTask, gateway: ChatGateway, template: str) -> AgentOutput:
    """One gateway call with the agent's prompt template, then citation scan."""
    request = ChatRequest(
        system_prompt=build_system_prompt(template, task.context, task.session_excerpt),
        messages=(ChatMessage(role="user", content=task.query),),
        agent_role=task.agent_kind.value,
    )
    try:
        response = gateway.complete(request)
    except GatewayError as exc:
        raise GatewayError(f"task {task.task_id}: {exc}", status=exc.status) from exc
    citations, grounded = extract_citations(response.content, task.context.passages)
    return AgentOutput(
        task_id=task.task_id,
        agent_kind=task.agent_kind,
        answer=response.content,
        citations=citations,
        grounded=grounded,
    )


def consolidate(outputs: Sequence[AgentOutput]) -> tuple[str, tuple[Citation, ...]]:
    """Single agent answers verbatim; several get headed sections. Citations
    are the order-preserving union, deduplicated by chunk_id."""
    if len(outputs) == 1:
        text = outputs[0].answer
    else:
        sections = [
            f"## {SECTION_HEADINGS[out.agent_kind]}\n\n{out.answer}" for out in outputs
        ]
        text = "\n\n".join(sections)
    seen: dict[str, Citation] = {}
    for out in outputs:
        for citation in out.citations:
            if citation.chunk_id not in seen:
                seen[citation.chunk_id] = citation
    return text, tuple(seen.values())


class Orchestrator:
    """Binds one classifier/retriever/gateway generation; stateless otherwise."""

    def __init__(
        self,
        classifier: DomainClassifier,
        retriever: Retriever,
        gateway: ChatGateway,
        prompts: Mapping[str, str],
        markers: Mapping[AgentKind, tuple[str, ...]],
        refusal_text: str,
        session_window: int = 6,
    ):
        self._classifier = classifier
        self._retriever = retriever
        self._gateway = gateway
        self._prompts = prompts
        self._markers = markers
        self._refusal_text = refusal_text
        self._session_window = session_window

    def orchestrate(
        self, query: str, history: Sequence[tuple[str, str]] = ()
    ) -> DraftResponse:
        classification = self._classifier.classify(query)
        excerpt = tuple(history[-self._session_window :])

        if classification.label == DomainLabel.OUT_OF_DOMAIN:
            routing = RoutingDecision(
                classification=classification,
                complexity="simple",
                selected_agents=(),
                rationale_tags=(),
            )
            return DraftResponse(
                query=query,
                text=self._refusal_text,
                classification=classification,
                routing=routing,
                citations=(),
                grounded=False,
                refusal=True,
                context=EMPTY_CONTEXT,
            )

        try:
            context = self._retriever.retrieve(query)
        except RetrievalUnavailableError:
            context = EMPTY_CONTEXT

        routing = route(query, classification, self._markers)

        if routing.complexity == "simple":
            request = ChatRequest(
                system_prompt=build_system_prompt(
                    self._prompts["general"], context, excerpt
                ),
                messages=(ChatMessage(role="user", content=query),),
                agent_role="general",
            )
            response = self._gateway.complete(request)
            citations, grounded = extract_citations(response.content, context.passages)
            text = response.content
        else:
            outputs = []
            for n, kind in enumerate(routing.selected_agents, start=1):
                task = AgentTask(
                    task_id=f"t{n}-{kind.value}",
                    agent_kind=kind,
                    query=query,
                    context=context,
                    session_excerpt=excerpt,
                )
                outputs.append(run_sub_agent(task, self._gateway, self._prompts[kind.value]))
            text, citations = consolidate(outputs)
            grounded = bool(citations)

        return DraftResponse(
            query=query,
            text=text,
            classification=classification,
            routing=routing,
            citations=citations,
            grounded=grounded,
            refusal=False,
            context=context,
        )
