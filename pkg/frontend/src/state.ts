// Chat view model. State is a pure projection of API responses; the only
// thing persisted client-side is the session id (sessionStorage), so a
// reload always refetches history from the backend.

import { ApiError, HistoryTurn, NyayaApi, QueryResult } from './api.js';

export interface TurnView {
  ordinal: number;
  user_text: string;
  final_text: string;
  domain: string;
  confidence: number;
  complexity: 'simple' | 'complex';
  agents_used: string[];
  decision: 'pass' | 'pass_with_disclaimer' | 'blocked';
  fired_rules: string[];
  citations: { chunk_id: string; source_citation: string }[];
}

export interface ChatState {
  sessionId: string | null;
  turns: TurnView[];
  pending: boolean;
  notice: string | null;
  // set when a send failed for a retryable reason; the composer keeps it
  failedInput: string | null;
}

const SESSION_KEY = 'nyaya.session_id';

function turnFromResult(ordinal: number, userText: string, result: QueryResult): TurnView {
  return {
    ordinal,
    user_text: userText,
    final_text: result.final_text,
    domain: result.domain,
    confidence: result.confidence,
    complexity: result.complexity,
    agents_used: result.agents_used,
    decision: result.compliance.decision,
    fired_rules: result.compliance.fired_rules,
    citations: result.citations,
  };
}

function turnFromHistory(turn: HistoryTurn): TurnView {
  return {
    ordinal: turn.ordinal,
    user_text: turn.user_text,
    final_text: turn.final_text,
    domain: turn.domain,
    confidence: turn.confidence,
    complexity: turn.complexity,
    agents_used: turn.agents_used,
    decision: turn.decision,
    fired_rules: turn.fired_rules,
    citations: turn.citations,
  };
}

export class ChatStore {
  readonly state: ChatState = {
    sessionId: null,
    turns: [],
    pending: false,
    notice: null,
    failedInput: null,
  };

  constructor(
    private api: NyayaApi,
    private storage: Storage = sessionStorage,
    private onChange: (state: ChatState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  /** Reuse the stored session and refetch its history; fall back to a
   * fresh session (with a notice) when the backend no longer knows it. */
  async start(): Promise<void> {
    const stored = this.storage.getItem(SESSION_KEY);
    if (stored) {
      try {
        const turns = await this.api.getHistory(stored);
        this.state.sessionId = stored;
        this.state.turns = turns.map(turnFromHistory);
        this.emit();
        return;
      } catch (err) {
        if (!(err instanceof ApiError) || err.status !== 404) throw err;
        this.state.notice = 'Previous session expired; started a new one.';
      }
    }
    await this.newSession();
  }

  private async newSession(): Promise<void> {
    this.state.sessionId = await this.api.createSession();
    this.state.turns = [];
    this.storage.setItem(SESSION_KEY, this.state.sessionId);
    this.emit();
  }

  /** One in-flight query per session; empty input is ignored. */
  async send(rawText: string): Promise<void> {
    const text = rawText.trim();
    if (!text || this.state.pending || !this.state.sessionId) return;
    this.state.pending = true;
    this.state.notice = null;
    this.state.failedInput = null;
    this.emit();
    try {
      const result = await this.api.sendQuery(this.state.sessionId, text);
      this.state.turns = [
        ...this.state.turns,
        turnFromResult(this.state.turns.length, text, result),
      ];
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        // the backend lost the session: open a fresh one, keep the input
        this.state.notice = 'Session was not found; started a new one. Send again.';
        this.state.failedInput = text;
        await this.newSession();
      } else {
        this.state.notice = 'Could not reach the server. Your message is kept below; retry.';
        this.state.failedInput = text;
      }
    } finally {
      this.state.pending = false;
      this.emit();
    }
  }
}
