/** Label options and their keyboard shortcuts. */

/** The eight relation classes in canonical order; keys 1-8 follow it. */
export const CLASS_NAMES = [
  'Uncorrelated',
  'Interdependent',
  'Complementary',
  'Illustration',
  'Anchorage',
  'Contrasting',
  'Bad Illustration',
  'Bad Anchorage',
] as const;

export const UNSURE = 'Unsure';

export type LabelName = (typeof CLASS_NAMES)[number] | typeof UNSURE;

/** Map a keyboard key to a label: '1'..'8' are the classes, '0' is Unsure. */
export function labelForKey(key: string): LabelName | null {
  if (key === '0') return UNSURE;
  const index = Number.parseInt(key, 10);
  if (Number.isInteger(index) && index >= 1 && index <= CLASS_NAMES.length) {
    return CLASS_NAMES[index - 1];
  }
  return null;
}

export function shortcutFor(label: LabelName): string {
  if (label === UNSURE) return '0';
  return String(CLASS_NAMES.indexOf(label) + 1);
}
