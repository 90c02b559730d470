/** DOM wiring for the annotation interface. */

import { AnnotationApi } from './api.js';
import { AnnotationFlow, ViewState } from './app.js';
import { CLASS_NAMES, UNSURE, LabelName, labelForKey, shortcutFor } from './labels.js';

const HELP_HTML = `
<h2>How to decide</h2>
<p>Judge three things about the pair on screen, then pick the one class
that fits all three.</p>
<dl>
  <dt>Concept overlap</dt>
  <dd>Do image and text show or name any of the same things? None at all,
  or at least some shared objects, people, places.</dd>
  <dt>Semantic fit</dt>
  <dd>Taken together, do the two sides build one coherent message (+),
  simply have nothing to do with each other (0), or clash on details the
  text claims about the image (&minus;)?</dd>
  <dt>Importance balance</dt>
  <dd>Is the image just a swappable example for the text (text leads), is
  the text a caption-like aid for the image (image leads), or do both
  carry the message equally?</dd>
</dl>
<h2>The classes</h2>
<ol>
  <li><b>Uncorrelated</b> — nothing shared, no joint meaning.</li>
  <li><b>Interdependent</b> — nothing shared on the surface, yet together
  they create a meaning neither has alone (ads, comics).</li>
  <li><b>Complementary</b> — shared content, coherent, equal weight.</li>
  <li><b>Illustration</b> — text leads; the image is one example of what
  the text describes.</li>
  <li><b>Anchorage</b> — image leads; the text pins down what you see.</li>
  <li><b>Contrasting</b> — like Complementary, but details contradict.</li>
  <li><b>Bad Illustration</b> — like Illustration, but the example
  contradicts the description.</li>
  <li><b>Bad Anchorage</b> — like Anchorage, but the caption misdescribes
  the image.</li>
</ol>
<p>Use <b>Unsure (0)</b> when no class can be assigned with confidence.</p>
`;

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

function annotatorFromLocation(): string | null {
  const params = new URLSearchParams(window.location.search);
  const name = params.get('annotator');
  return name && name.trim() ? name.trim() : null;
}

function renderSignIn(root: HTMLElement): void {
  root.replaceChildren();
  const box = el('div', 'signin');
  box.append(el('h1', undefined, 'Image-text annotation'));
  box.append(el('p', undefined, 'Enter your annotator id to begin.'));
  const form = el('form');
  const input = el('input');
  input.name = 'annotator';
  input.placeholder = 'annotator id';
  const button = el('button', undefined, 'Start');
  form.append(input, button);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    if (input.value.trim()) {
      const url = new URL(window.location.href);
      url.searchParams.set('annotator', input.value.trim());
      window.location.assign(url.toString());
    }
  });
  box.append(form);
  root.append(box);
}

export function render(root: HTMLElement, state: ViewState, flow: AnnotationFlow): void {
  root.replaceChildren();

  const header = el('header');
  header.append(el('span', 'who', state.annotator));
  header.append(
    el('span', 'progress', `${state.labeled} / ${state.total} labeled`),
  );
  const alphaText =
    state.alpha !== null
      ? `agreement α = ${state.alpha.toFixed(3)}`
      : `agreement: ${state.alphaNote ?? 'n/a'}`;
  header.append(el('span', 'alpha', alphaText));
  const helpButton = el('button', 'help-toggle', 'Help');
  header.append(helpButton);
  root.append(header);

  const help = el('aside', 'help hidden');
  help.innerHTML = HELP_HTML;
  helpButton.addEventListener('click', () => help.classList.toggle('hidden'));
  root.append(help);

  if (state.error !== null) {
    const banner = el('div', 'banner error');
    banner.append(el('span', undefined, state.error));
    const retry = el('button', 'retry', 'Retry');
    retry.addEventListener('click', () => void flow.retry());
    banner.append(retry);
    root.append(banner);
  }

  if (state.phase === 'done') {
    const done = el('div', 'done');
    done.append(el('h1', undefined, 'All pairs labeled, thank you!'));
    const link = el('a', undefined, 'Download the label export');
    link.setAttribute('href', '/api/export');
    done.append(link);
    root.append(done);
    return;
  }

  if (state.pair === null) {
    root.append(el('div', 'loading', 'Loading…'));
    return;
  }

  const card = el('main', 'pair-card');
  card.dataset.pairId = state.pair.id;
  const img = el('img', 'pair-image');
  img.src = state.pair.image_url;
  img.alt = 'image under annotation';
  card.append(img);
  card.append(el('p', 'pair-text', state.pair.text));
  root.append(card);

  const busy = state.phase !== 'labeling';
  const buttons = el('div', 'labels');
  const options: LabelName[] = [...CLASS_NAMES, UNSURE];
  for (const label of options) {
    const button = el('button', 'label', `${label} (${shortcutFor(label)})`);
    button.dataset.label = label;
    button.disabled = busy;
    button.addEventListener('click', () => void flow.choose(label));
    buttons.append(button);
  }
  root.append(buttons);
}

export function installKeyboard(flow: AnnotationFlow): void {
  window.addEventListener('keydown', (event) => {
    const target = event.target as HTMLElement | null;
    if (target instanceof HTMLInputElement || target instanceof HTMLTextAreaElement) {
      return;
    }
    const label = labelForKey(event.key);
    if (label !== null) {
      event.preventDefault();
      void flow.choose(label);
    }
  });
}

export function mount(root: HTMLElement, apiBase = ''): AnnotationFlow | null {
  const annotator = annotatorFromLocation();
  if (annotator === null) {
    renderSignIn(root);
    return null;
  }
  const api = new AnnotationApi(apiBase);
  const flow = new AnnotationFlow(api, annotator, (state) => render(root, state, flow));
  installKeyboard(flow);
  void flow.start();
  return flow;
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  mount(document.getElementById('app') as HTMLElement);
}
