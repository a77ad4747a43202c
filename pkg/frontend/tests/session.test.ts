import { beforeEach, describe, expect, it } from 'vitest';

import { loadSession, markExported, newSession, recordResponse,
         trackSwitchBlock } from '../src/session';

beforeEach(() => {
  localStorage.clear();
});

describe('session persistence', () => {
  it('saves each response immediately and restores after reload', () => {
    let session = newSession('b1', 'alice', 0);
    session = recordResponse(session, 't1', 'word');
    session = recordResponse(session, 't2', 2);
    const restored = loadSession('b1', 'alice', 0);
    expect(restored).not.toBeNull();
    expect(restored!.responses).toEqual({ t1: 'word', t2: 2 });
    expect(restored!.exported).toBe(false);
  });

  it('allows revising a response until export', () => {
    let session = newSession('b1', 'alice', 0);
    session = recordResponse(session, 't1', 'first');
    session = recordResponse(session, 't1', 'second');
    expect(loadSession('b1', 'alice', 0)!.responses.t1).toBe('second');
  });

  it('keeps sessions separate per annotator and track', () => {
    recordResponse(newSession('b1', 'alice', 0), 't1', 'x');
    recordResponse(newSession('b1', 'bob', 1), 't9', 'y');
    expect(loadSession('b1', 'alice', 0)!.responses).toEqual({ t1: 'x' });
    expect(loadSession('b1', 'bob', 1)!.responses).toEqual({ t9: 'y' });
    expect(loadSession('b1', 'alice', 1)).toBeNull();
  });

  it('returns null on corrupted storage', () => {
    localStorage.setItem('topicbench:session:b1:alice:0', '{broken');
    expect(loadSession('b1', 'alice', 0)).toBeNull();
  });
});

describe('one track per session', () => {
  it('blocks switching tracks before export', () => {
    recordResponse(newSession('b1', 'alice', 0), 't1', 'x');
    expect(trackSwitchBlock('b1', 'alice', 1)).toMatch(/export it before/);
    expect(trackSwitchBlock('b2', 'alice', 0)).toMatch(/export it before/);
  });

  it('resuming the same track is always allowed', () => {
    recordResponse(newSession('b1', 'alice', 0), 't1', 'x');
    expect(trackSwitchBlock('b1', 'alice', 0)).toBeNull();
  });

  it('export unlocks switching', () => {
    const session = recordResponse(newSession('b1', 'alice', 0), 't1', 'x');
    markExported(session);
    expect(trackSwitchBlock('b1', 'alice', 1)).toBeNull();
  });
});
