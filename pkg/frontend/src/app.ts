/** Annotation flow state machine, kept free of DOM concerns.
 *
 * Invariants: one pair on screen at a time; one submission in flight at a
 * time; a label always belongs to the pair that was displayed when the
 * choice was made; a failed submission keeps the pair and the choice for
 * an explicit retry, so nothing is lost silently.
 */

import { AnnotationApi, ApiError, PairPayload } from './api.js';
import { LabelName } from './labels.js';

export type Phase = 'loading' | 'labeling' | 'submitting' | 'done' | 'error';

export interface ViewState {
  phase: Phase;
  annotator: string;
  pair: PairPayload | null;
  labeled: number;
  total: number;
  alpha: number | null;
  alphaNote: string | null;
  error: string | null;
  pendingLabel: LabelName | null;
}

export type StateListener = (state: ViewState) => void;

export class AnnotationFlow {
  private state: ViewState;

  constructor(
    private readonly api: AnnotationApi,
    annotator: string,
    private readonly listener: StateListener,
  ) {
    this.state = {
      phase: 'loading',
      annotator,
      pair: null,
      labeled: 0,
      total: 0,
      alpha: null,
      alphaNote: null,
      error: null,
      pendingLabel: null,
    };
  }

  current(): ViewState {
    return { ...this.state };
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    this.listener(this.current());
  }

  async start(): Promise<void> {
    this.update({ phase: 'loading' });
    try {
      await this.refreshCounters();
      await this.advance();
    } catch (err) {
      this.update({ phase: 'error', error: describe(err), pendingLabel: null });
    }
  }

  /** Submit a label for the currently displayed pair, then advance. */
  async choose(label: LabelName): Promise<void> {
    if (this.state.phase !== 'labeling' || this.state.pair === null) {
      return; // in-flight, finished, or errored: ignore input
    }
    const pair = this.state.pair; // pin the pair the user was looking at
    this.update({ phase: 'submitting', pendingLabel: label });
    try {
      await this.api.submitLabel(this.state.annotator, pair.id, label);
      this.update({ pendingLabel: null, error: null });
      await this.refreshCounters();
      await this.advance();
    } catch (err) {
      // keep the same pair visible; offer a retry with the same label
      this.update({ phase: 'error', pair, error: describe(err) });
    }
  }

  /** Re-attempt after a failed submission (same pair, same label). */
  async retry(): Promise<void> {
    if (this.state.phase !== 'error') return;
    const pending = this.state.pendingLabel;
    this.update({ phase: 'labeling', error: null, pendingLabel: null });
    if (pending !== null && this.state.pair !== null) {
      await this.choose(pending);
    } else if (this.state.pair === null) {
      await this.start();
    }
  }

  private async advance(): Promise<void> {
    const next = await this.api.nextPair(this.state.annotator);
    if (next.done) {
      this.update({ phase: 'done', pair: null });
    } else {
      this.update({ phase: 'labeling', pair: next.pair ?? null });
    }
  }

  private async refreshCounters(): Promise<void> {
    const progress = await this.api.progress();
    let alpha: number | null = null;
    let alphaNote: string | null = null;
    try {
      const agreement = await this.api.agreement();
      alpha = agreement.alpha;
      alphaNote = agreement.insufficient_data ? 'needs two raters per pair' : null;
    } catch {
      alphaNote = 'unavailable';
    }
    this.update({
      labeled: progress.annotators[this.state.annotator] ?? 0,
      total: progress.total_pairs,
      alpha,
      alphaNote,
    });
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  if (err instanceof Error) return `network failure: ${err.message}`;
  return String(err);
}
