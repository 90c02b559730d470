// @vitest-environment jsdom
//
// Full-loop check against the real annotation backend: build a 10-pair
// corpus, serve it, drive the UI for two annotators entirely through
// keyboard events, then compare the export against a hand-computed
// majority resolution and the live agreement value against an offline
// recomputation through the CLI.
import { execFileSync, spawn, ChildProcess } from 'node:child_process';
import { mkdtempSync, rmSync, writeFileSync } from 'node:fs';
import net from 'node:net';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { AnnotationFlow } from '../src/app.js';
import { mount } from '../src/main.js';
import { CLASS_NAMES } from '../src/labels.js';

const PYTHON = process.env.PYTHON ?? 'python3';

let workDir: string;
let server: ChildProcess | null = null;
let base: string;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.listen(0, '127.0.0.1', () => {
      const port = (probe.address() as net.AddressInfo).port;
      probe.close(() => resolve(port));
    });
    probe.on('error', reject);
  });
}

async function until(cond: () => boolean, what: string, timeoutMs = 30_000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > timeoutMs) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 25));
  }
}

async function serverReady(url: string, timeoutMs = 30_000): Promise<void> {
  const start = Date.now();
  for (;;) {
    try {
      const r = await fetch(url);
      if (r.ok) return;
    } catch {
      /* not up yet */
    }
    if (Date.now() - start > timeoutMs) throw new Error('annotation server never came up');
    await new Promise((r) => setTimeout(r, 100));
  }
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), 'itforge-ui-'));
  const mini = execFileSync(
    PYTHON,
    ['-c', 'from importlib import resources; print(resources.files("itforge").joinpath("data/mini"))'],
    { encoding: 'utf-8' },
  ).trim();
  const config = {
    captions_path: join(mini, 'captions.jsonl'),
    stories_path: join(mini, 'stories.jsonl'),
    concept_images_path: join(mini, 'concept_images.jsonl'),
    concept_summaries_path: join(mini, 'concept_summaries.jsonl'),
    slogans_path: join(mini, 'slogans.jsonl'),
    targets: {
      Uncorrelated: 2,
      Interdependent: 2,
      Complementary: 1,
      Illustration: 1,
      Anchorage: 1,
      Contrasting: 1,
      'Bad Illustration': 1,
      'Bad Anchorage': 1,
    },
    seed: 11,
  };
  writeFileSync(join(workDir, 'build.json'), JSON.stringify(config));
  execFileSync(
    PYTHON,
    ['-m', 'itforge.cli', 'build', '--config', join(workDir, 'build.json'), '--out', join(workDir, 'corpus')],
    { stdio: 'pipe' },
  );

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    PYTHON,
    [
      '-m',
      'itforge.cli',
      'annotate-serve',
      '--corpus',
      join(workDir, 'corpus', 'corpus.jsonl'),
      '--log',
      join(workDir, 'labels.jsonl'),
      '--annotators',
      'alice,bob',
      '--addr',
      `127.0.0.1:${port}`,
      '--session-seed',
      '3',
    ],
    { stdio: 'pipe' },
  );
  await serverReady(`${base}/api/progress`);
}, 120_000);

afterAll(() => {
  server?.kill();
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

/** Drive one annotator through every pair using only keyboard events. */
async function annotateAll(
  annotator: string,
  pickLabel: (pairId: string, ordinal: number) => string,
): Promise<Record<string, string>> {
  window.history.replaceState({}, '', `/?annotator=${annotator}`);
  const root = document.createElement('div');
  document.body.append(root);
  const flow = mount(root, base) as AnnotationFlow;
  expect(flow).not.toBeNull();
  await until(() => flow.current().phase === 'labeling', `${annotator} first pair`);

  const submitted: Record<string, string> = {};
  let ordinal = 0;
  while (flow.current().phase !== 'done') {
    const state = flow.current();
    expect(state.phase).toBe('labeling');
    const pair = state.pair!;
    expect(Object.keys(pair).sort()).toEqual(['id', 'image_url', 'text']);
    expect(root.querySelector('.pair-card')?.getAttribute('data-pair-id')).toBe(pair.id);

    const label = pickLabel(pair.id, ordinal);
    const key =
      label === 'Unsure' ? '0' : String(CLASS_NAMES.indexOf(label as never) + 1);
    window.dispatchEvent(new KeyboardEvent('keydown', { key }));
    submitted[pair.id] = label;
    ordinal += 1;
    await until(
      () =>
        flow.current().phase === 'done' ||
        (flow.current().phase === 'labeling' && flow.current().pair?.id !== pair.id),
      `${annotator} advance past ${pair.id}`,
    );
  }
  expect(root.textContent).toContain('All pairs labeled');
  root.remove();
  return submitted;
}

describe('annotation loop against the live service', () => {
  it(
    'labels 10 pairs per annotator and matches offline resolution and alpha',
    async () => {
      const aliceLabels = await annotateAll('alice', (_id, ordinal) => {
        return CLASS_NAMES[ordinal % CLASS_NAMES.length];
      });
      expect(Object.keys(aliceLabels)).toHaveLength(10);

      // bob mirrors alice except for one deliberate Unsure
      const unsureTarget = Object.keys(aliceLabels).sort()[0];
      const bobLabels = await annotateAll('bob', (id) =>
        id === unsureTarget ? 'Unsure' : aliceLabels[id],
      );
      expect(Object.keys(bobLabels)).toHaveLength(10);

      // hand-computed strict-majority expectation over the two votes
      const expectedResolved: Record<string, string> = {};
      const expectedExcluded: string[] = [];
      for (const [id, label] of Object.entries(aliceLabels)) {
        if (bobLabels[id] === label && label !== 'Unsure') {
          expectedResolved[id] = label;
        } else {
          expectedExcluded.push(id); // 1-1 split: no strict majority
        }
      }
      expect(expectedExcluded).toEqual([unsureTarget]);

      const exportBody = (await (await fetch(`${base}/api/export`)).json()).data;
      expect(exportBody.records).toHaveLength(20);
      expect(exportBody.resolved).toEqual(expectedResolved);
      expect(Object.keys(exportBody.excluded)).toEqual(expectedExcluded);
      expect(exportBody.excluded[unsureTarget]).toBe('no-majority');

      // live alpha must equal the offline recomputation, exactly
      const agreement = (await (await fetch(`${base}/api/agreement`)).json()).data;
      expect(agreement.insufficient_data).toBe(false);
      const recordsPath = join(workDir, 'export-records.jsonl');
      writeFileSync(
        recordsPath,
        exportBody.records.map((r: unknown) => JSON.stringify(r)).join('\n') + '\n',
      );
      const offline = JSON.parse(
        execFileSync(
          PYTHON,
          ['-m', 'itforge.cli', 'evaluate', '--labels', recordsPath, '--json'],
          { encoding: 'utf-8' },
        ),
      );
      expect(typeof agreement.alpha).toBe('number');
      expect(agreement.alpha).toBe(offline.alpha);
      expect(offline.resolved).toBe(Object.keys(expectedResolved).length);
    },
    180_000,
  );
});
