/** Typed client for the annotation service's JSON API. */

export interface PairPayload {
  id: string;
  image_url: string;
  text: string;
}

export interface NextPairResponse {
  done: boolean;
  pair?: PairPayload;
}

export interface Progress {
  total_pairs: number;
  annotators: Record<string, number>;
  log_events: number;
}

export interface AgreementSnapshot {
  alpha: number | null;
  insufficient_data: boolean;
  reason?: string;
  votes: Record<string, Record<string, string>>;
}

export interface ExportPayload {
  records: Array<{
    pair_id: string;
    annotator_id: string;
    label: string;
    timestamp: string;
  }>;
  resolved: Record<string, string>;
  excluded: Record<string, string>;
}

/** Server-reported failure ({ok:false}); distinct from network failures. */
export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  const body = (await response.json()) as { ok: boolean; data?: T; error?: string };
  if (!body.ok) {
    throw new ApiError(body.error ?? `request failed (${response.status})`, response.status);
  }
  return body.data as T;
}

export class AnnotationApi {
  constructor(private readonly base: string = '') {}

  async nextPair(annotator: string): Promise<NextPairResponse> {
    const response = await fetch(
      `${this.base}/api/pairs/next?annotator=${encodeURIComponent(annotator)}`,
    );
    return unwrap<NextPairResponse>(response);
  }

  async submitLabel(annotator: string, pairId: string, label: string): Promise<void> {
    const response = await fetch(`${this.base}/api/labels`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ pair_id: pairId, annotator, label }),
    });
    await unwrap<unknown>(response);
  }

  async progress(): Promise<Progress> {
    return unwrap<Progress>(await fetch(`${this.base}/api/progress`));
  }

  async agreement(): Promise<AgreementSnapshot> {
    return unwrap<AgreementSnapshot>(await fetch(`${this.base}/api/agreement`));
  }

  async exportLabels(): Promise<ExportPayload> {
    return unwrap<ExportPayload>(await fetch(`${this.base}/api/export`));
  }
}
