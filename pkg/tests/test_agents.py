from __future__ import annotations

import pytest

from nyaya.agents import (
    EXECUTION_ORDER,
    AgentKind,
    AgentTask,
    Citation,
    Orchestrator,
    RoutingDecision,
    consolidate,
    extract_citations,
    load_marker_table,
    route,
    run_sub_agent,
)
from nyaya.classifier import Classification, DomainClassifier, DomainLabel, load_lexicon
from nyaya.config import data_path
from nyaya.errors import GatewayError
from nyaya.llm_gateway import Script, ScriptedGateway, ScriptEntry
from nyaya.retrieval import EMPTY_CONTEXT, Passage, RetrievedContext, Retriever
from nyaya.embedding import LocalHashEmbedder

MARKERS = load_marker_table(data_path("markers.json"))


def classification(label=DomainLabel.CRIMINAL) -> Classification:
    scores = {d: 0.0 for d in (DomainLabel.CONSTITUTIONAL, DomainLabel.CRIMINAL,
                               DomainLabel.CIVIL, DomainLabel.FAMILY, DomainLabel.CORPORATE)}
    if label != DomainLabel.OUT_OF_DOMAIN:
        scores[label] = 1.0
    return Classification(label=label, scores=scores, confidence=0.9)


def passages(n: int) -> tuple[Passage, ...]:
    return tuple(
        Passage(
            chunk_id=f"doc{i}#0000",
            doc_id=f"doc{i}",
            source_citation=f"Source {i}",
            score=1.0 - i / 10,
            text=f"passage text {i}",
        )
        for i in range(1, n + 1)
    )


def context(n: int) -> RetrievedContext:
    blocks = [f"[{i}] Source {i}\npassage text {i}" for i in range(1, n + 1)]
    return RetrievedContext(
        passages=passages(n), context_text="\n\n".join(blocks), token_budget_used=0
    )


# -- route ------------------------------------------------------------------------


def test_single_question_no_markers_is_simple():
    decision = route("What is bail?", classification(), MARKERS)
    assert decision.complexity == "simple"
    assert decision.selected_agents == ()


def test_summarize_marker_selects_summarization():
    decision = route("Summarize the law on adoption.", classification(), MARKERS)
    assert decision.complexity == "complex"
    assert decision.selected_agents == (AgentKind.SUMMARIZATION,)
    assert "summarize" in decision.rationale_tags


def test_plural_precedents_fires_case_analysis():
    decision = route("Find precedents and draft a notice", classification(), MARKERS)
    assert decision.complexity == "complex"
    assert decision.selected_agents == (AgentKind.CASE_ANALYSIS, AgentKind.DRAFTING)


def test_selected_agents_respect_fixed_execution_order():
    query = "Draft a petition, summarize the case law, and check the statute on precedent."
    decision = route(query, classification(), MARKERS)
    assert decision.selected_agents == tuple(
        k for k in EXECUTION_ORDER if k in decision.selected_agents
    )
    assert set(decision.selected_agents) == {
        AgentKind.RESEARCH,
        AgentKind.CASE_ANALYSIS,
        AgentKind.SUMMARIZATION,
        AgentKind.DRAFTING,
    }


def test_two_sentence_final_questions_force_complex_with_research_fallback():
    decision = route("Is bail possible? Who decides it?", classification(), MARKERS)
    assert decision.complexity == "complex"
    assert decision.selected_agents == (AgentKind.RESEARCH,)
    assert "multi_question" in decision.rationale_tags


def test_single_question_mark_mid_text_not_complex():
    decision = route("What is bail? please explain", classification(), MARKERS)
    assert decision.complexity == "simple"


def test_route_is_pure():
    query = "Summarize the judgment"
    a = route(query, classification(), MARKERS)
    b = route(query, classification(), MARKERS)
    assert a == b


def test_route_invariant_simple_means_no_agents_complex_means_some():
    for query in (
        "What is bail?",
        "Draft an agreement",
        "Is it legal? Is it safe?",
        "hello there",
    ):
        decision = route(query, classification(), MARKERS)
        if decision.complexity == "simple":
            assert decision.selected_agents == ()
        else:
            assert len(decision.selected_agents) >= 1


# -- citation extraction -------------------------------------------------------------


def test_extract_citations_valid_marker():
    citations, grounded = extract_citations("As per [1], theft is defined...", passages(3))
    assert citations == (Citation("doc1#0000", "Source 1"),)
    assert grounded


def test_extract_citations_none_found():
    citations, grounded = extract_citations("no markers here", passages(3))
    assert citations == ()
    assert not grounded


def test_extract_citations_out_of_range_ignored():
    citations, grounded = extract_citations("see [7] for details", passages(3))
    assert citations == ()
    assert not grounded


def test_extract_citations_dedup_first_occurrence_order():
    citations, grounded = extract_citations("[2] then [1] then [2] again", passages(3))
    assert [c.chunk_id for c in citations] == ["doc2#0000", "doc1#0000"]
    assert grounded


# -- run_sub_agent ---------------------------------------------------------------------


def test_run_sub_agent_scans_citations():
    gw = ScriptedGateway(
        Script(entries=(ScriptEntry("research", "theft", "As per [1], theft is ..."),))
    )
    task = AgentTask(
        task_id="t1-research",
        agent_kind=AgentKind.RESEARCH,
        query="what about theft",
        context=context(3),
        session_excerpt=(),
    )
    out = run_sub_agent(task, gw, "template {context} {history}")
    assert out.grounded
    assert out.citations == (Citation("doc1#0000", "Source 1"),)
    assert out.agent_kind == AgentKind.RESEARCH


def test_run_sub_agent_wraps_gateway_error_with_task_id():
    gw = ScriptedGateway(Script(entries=()))
    task = AgentTask(
        task_id="t9-drafting",
        agent_kind=AgentKind.DRAFTING,
        query="draft something",
        context=EMPTY_CONTEXT,
        session_excerpt=(),
    )
    with pytest.raises(GatewayError) as err:
        run_sub_agent(task, gw, "template")
    assert "t9-drafting" in str(err.value)


# -- consolidation ------------------------------------------------------------------------


def out_for(kind: AgentKind, answer: str, cites: tuple[Citation, ...]):
    from nyaya.agents import AgentOutput

    return AgentOutput(
        task_id=f"t-{kind.value}", agent_kind=kind, answer=answer,
        citations=cites, grounded=bool(cites),
    )


def test_consolidate_single_agent_verbatim():
    output = out_for(AgentKind.RESEARCH, "the answer", (Citation("a", "A"),))
    text, citations = consolidate([output])
    assert text == "the answer"
    assert citations == (Citation("a", "A"),)


def test_consolidate_multiple_agents_headed_sections_and_deduped_citations():
    first = out_for(
        AgentKind.CASE_ANALYSIS, "analysis text", (Citation("a", "A"), Citation("b", "B"))
    )
    second = out_for(AgentKind.DRAFTING, "draft text", (Citation("b", "B"), Citation("c", "C")))
    text, citations = consolidate([first, second])
    assert "## Case Analysis" in text
    assert "## Draft" in text
    assert text.index("analysis text") < text.index("draft text")
    assert [c.chunk_id for c in citations] == ["a", "b", "c"]


# -- orchestrate ---------------------------------------------------------------------------


class CountingGateway:
    def __init__(self, inner):
        self.inner = inner
        self.calls = []

    def complete(self, request):
        self.calls.append(request.agent_role)
        return self.inner.complete(request)


def make_orchestrator(gateway, lexicon=None, retriever=None):
    lexicon = lexicon or load_lexicon(data_path("lexicon.jsonl"))
    classifier = DomainClassifier(lexicon)
    retriever = retriever or Retriever(LocalHashEmbedder(32), None, None)
    prompts = {
        name: f"{name} prompt {{context}} {{history}}"
        for name in ("general", "research", "case_analysis", "summarization", "drafting")
    }
    return Orchestrator(
        classifier=classifier,
        retriever=retriever,
        gateway=gateway,
        prompts=prompts,
        markers=MARKERS,
        refusal_text="refusal text",
        session_window=6,
    )


def test_orchestrate_out_of_domain_short_circuits_with_zero_gateway_calls():
    gw = CountingGateway(ScriptedGateway(Script(entries=(), default="x")))
    orch = make_orchestrator(gw)
    draft = orch.orchestrate("best biryani recipe")
    assert draft.refusal
    assert draft.text == "refusal text"
    assert draft.classification.label == DomainLabel.OUT_OF_DOMAIN
    assert gw.calls == []
    assert draft.citations == ()


def test_orchestrate_simple_retrieval_unavailable_is_ungrounded():
    gw = CountingGateway(ScriptedGateway(Script(entries=(), default="plain answer")))
    orch = make_orchestrator(gw)
    draft = orch.orchestrate("What is bail?")
    assert not draft.refusal
    assert draft.routing.complexity == "simple"
    assert gw.calls == ["general"]
    assert not draft.grounded
    assert draft.citations == ()


def test_orchestrate_complex_runs_agents_in_order_and_unions_citations():
    script = Script(
        entries=(
            ScriptEntry("case_analysis", "", "case answer citing [1]"),
            ScriptEntry("drafting", "", "draft answer citing [1] and [2]"),
        ),
        default="d",
    )
    gw = CountingGateway(ScriptedGateway(script))

    # fixed two-passage retriever
    class FixedRetriever:
        def retrieve(self, query, k=None, min_score=None):
            return context(2)

    orch = make_orchestrator(gw, retriever=FixedRetriever())
    draft = orch.orchestrate("Find precedents on theft and draft a notice")
    assert gw.calls == ["case_analysis", "drafting"]
    assert "## Case Analysis" in draft.text and "## Draft" in draft.text
    assert [c.chunk_id for c in draft.citations] == ["doc1#0000", "doc2#0000"]
    assert draft.grounded


def test_orchestrate_passes_history_window():
    captured = {}

    class SpyGateway:
        def complete(self, request):
            captured["system"] = request.system_prompt
            from nyaya.llm_gateway import ChatResponse, ChatUsage

            return ChatResponse("ok", "spy", ChatUsage(0, 0))

    orch = make_orchestrator(SpyGateway())
    history = [(f"q{i}", f"a{i}") for i in range(10)]
    orch.orchestrate("What is bail?", history)
    assert "q9" in captured["system"] and "a9" in captured["system"]
    assert "q3" not in captured["system"]  # outside the 6-turn window


def test_marker_table_rejects_bad_shape():
    from nyaya.errors import RuleFileError

    with pytest.raises(RuleFileError):
        load_marker_table({"research": "not a list"})
