// Typed client for the nyaya /v1 JSON API. The UI never invents legal
// content: everything rendered comes out of these responses.

export interface Citation {
  chunk_id: string;
  source_citation: string;
}

export interface ComplianceInfo {
  decision: 'pass' | 'pass_with_disclaimer' | 'blocked';
  fired_rules: string[];
}

export interface QueryResult {
  final_text: string;
  domain: string;
  confidence: number;
  complexity: 'simple' | 'complex';
  agents_used: string[];
  citations: Citation[];
  compliance: ComplianceInfo;
  timing_ms: number;
}

export interface HistoryTurn {
  ordinal: number;
  user_text: string;
  final_text: string;
  domain: string;
  confidence: number;
  complexity: 'simple' | 'complex';
  agents_used: string[];
  decision: ComplianceInfo['decision'];
  fired_rules: string[];
  citations: Citation[];
  created_at: string;
}

export interface HealthInfo {
  status: string;
  corpus_docs: number;
  index_size: number;
  generation: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class NyayaApi {
  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, `network error: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === 'string') detail = body.detail;
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response.json() as Promise<T>;
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ session_id: string }>('/v1/sessions', {
      method: 'POST',
    });
    return body.session_id;
  }

  sendQuery(sessionId: string, text: string): Promise<QueryResult> {
    return this.request<QueryResult>(`/v1/sessions/${encodeURIComponent(sessionId)}/query`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ text }),
    });
  }

  async getHistory(sessionId: string): Promise<HistoryTurn[]> {
    const body = await this.request<{ turns: HistoryTurn[] }>(
      `/v1/sessions/${encodeURIComponent(sessionId)}/history`,
    );
    return body.turns;
  }

  getHealth(): Promise<HealthInfo> {
    return this.request<HealthInfo>('/v1/health');
  }
}
