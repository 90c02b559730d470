import { describe, expect, it } from 'vitest';

import { CLASS_NAMES, UNSURE, labelForKey, shortcutFor } from '../src/labels.js';

describe('keyboard label mapping', () => {
  it('maps 1-8 to the classes in canonical order', () => {
    expect(labelForKey('1')).toBe('Uncorrelated');
    expect(labelForKey('2')).toBe('Interdependent');
    expect(labelForKey('3')).toBe('Complementary');
    expect(labelForKey('4')).toBe('Illustration');
    expect(labelForKey('5')).toBe('Anchorage');
    expect(labelForKey('6')).toBe('Contrasting');
    expect(labelForKey('7')).toBe('Bad Illustration');
    expect(labelForKey('8')).toBe('Bad Anchorage');
  });

  it('maps 0 to Unsure', () => {
    expect(labelForKey('0')).toBe(UNSURE);
  });

  it('ignores everything else', () => {
    for (const key of ['9', 'a', 'Enter', ' ', 'F1', '-1']) {
      expect(labelForKey(key)).toBeNull();
    }
  });

  it('shortcuts round-trip', () => {
    for (const name of CLASS_NAMES) {
      expect(labelForKey(shortcutFor(name))).toBe(name);
    }
    expect(labelForKey(shortcutFor(UNSURE))).toBe(UNSURE);
  });

  it('never offers Undefined', () => {
    expect(CLASS_NAMES).not.toContain('Undefined');
  });
});
