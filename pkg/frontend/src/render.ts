// DOM projection of the chat state. No legal text originates here: every
// string rendered comes from the API (or is a fixed UI label).

import { ChatState, TurnView } from './state.js';

const DISCLAIMER_SENTINEL = '[nyaya notice: general legal information, not legal advice]';

export interface SplitAnswer {
  body: string;
  disclaimer: string | null;
}

/** Separate the compliance disclaimer block (delimited by a trailing
 * "---" line and the sentinel) from the answer body for styling. */
export function splitDisclaimer(finalText: string): SplitAnswer {
  if (!finalText.trimEnd().endsWith(DISCLAIMER_SENTINEL)) {
    return { body: finalText, disclaimer: null };
  }
  const marker = finalText.lastIndexOf('\n---\n');
  if (marker < 0) return { body: finalText, disclaimer: null };
  return {
    body: finalText.slice(0, marker).trimEnd(),
    disclaimer: finalText.slice(marker + 5).trimEnd(),
  };
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function badge(label: string, kind: string): HTMLElement {
  return el('span', `badge badge-${kind}`, label);
}

export function renderTurn(turn: TurnView): HTMLElement {
  const root = el('article', turn.decision === 'blocked' ? 'turn turn-blocked' : 'turn');
  root.dataset.ordinal = String(turn.ordinal);

  const user = el('div', 'user-text');
  user.append(el('span', 'speaker', 'You'), el('p', undefined, turn.user_text));
  root.append(user);

  const meta = el('div', 'meta');
  meta.append(badge(turn.domain, `domain-${turn.domain}`));
  meta.append(el('span', 'confidence', `${Math.round(turn.confidence * 100)}%`));
  for (const agent of turn.agents_used) {
    meta.append(el('span', 'chip agent-chip', agent));
  }
  meta.append(badge(turn.decision.replace(/_/g, ' '), `decision-${turn.decision}`));
  root.append(meta);

  if (turn.decision === 'blocked') {
    // the block message replaces the answer; there is no body to show
    root.append(el('div', 'block-message', turn.final_text));
  } else {
    const { body, disclaimer } = splitDisclaimer(turn.final_text);
    root.append(el('div', 'answer-body', body));
    if (disclaimer) {
      root.append(el('div', 'disclaimer', disclaimer));
    }
    if (turn.citations.length > 0) {
      const panel = el('details', 'citations');
      panel.append(el('summary', undefined, `Sources (${turn.citations.length})`));
      const list = el('ol', 'citation-list');
      for (const citation of turn.citations) {
        const item = el('li', 'citation');
        item.append(
          el('span', 'citation-source', citation.source_citation),
          el('span', 'citation-chunk', citation.chunk_id),
        );
        list.append(item);
      }
      panel.append(list);
      root.append(panel);
    }
  }

  if (turn.fired_rules.length > 0) {
    root.append(el('div', 'fired-rules', `rules: ${turn.fired_rules.join(', ')}`));
  }
  return root;
}

export function renderApp(state: ChatState, mount: HTMLElement): void {
  mount.replaceChildren();

  const notice = el('div', 'notice');
  if (state.notice) {
    notice.textContent = state.notice;
    notice.classList.add('notice-visible');
  }
  mount.append(notice);

  const turns = el('div', 'turns');
  for (const turn of state.turns) {
    turns.append(renderTurn(turn));
  }
  mount.append(turns);

  if (state.pending) {
    mount.append(el('div', 'pending', 'Thinking…'));
  }
}
