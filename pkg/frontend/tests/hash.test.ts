import { describe, expect, it } from 'vitest';

import { canonicalize, digestContractText, sha256Hex } from '../src/hash.js';

// Mirrors of the server's own frozen vectors; both sides must agree or
// signatories would confirm digests the chain never stores.
const SHA256_EMPTY = 'e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855';
const SHA256_ABC = 'ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad';
const MSA_DIGEST = '7d551ba1a2f1ecf40cd00e057c6a084ff3e39527ea6a1d1e39155f3112361a30';

describe('canonicalize', () => {
  it('matches the server rules', () => {
    expect(canonicalize('')).toBe('');
    expect(canonicalize('a')).toBe('a\n');
    expect(canonicalize('a\n')).toBe('a\n');
    expect(canonicalize('a\r\nb\rc')).toBe('a\nb\nc\n');
    expect(canonicalize('a\n\n\n')).toBe('a\n');
    expect(canonicalize('\n\n')).toBe('\n');
    expect(canonicalize('a\n\nb\n')).toBe('a\n\nb\n');
  });

  it('is idempotent', () => {
    const samples = ['', 'x', 'x\r\n', 'line one\nline two\n\n', '\r', '\n\n\n'];
    for (const s of samples) {
      expect(canonicalize(canonicalize(s))).toBe(canonicalize(s));
    }
  });
});

describe('sha256Hex', () => {
  it('reproduces the frozen vectors', async () => {
    expect(await sha256Hex(new Uint8Array())).toBe(SHA256_EMPTY);
    expect(await sha256Hex(new TextEncoder().encode('abc'))).toBe(SHA256_ABC);
  });
});

describe('digestContractText', () => {
  it('agrees with the server-computed digest of a known contract', async () => {
    expect(await digestContractText('Master services agreement: v1 terms.')).toBe(MSA_DIGEST);
    expect(await digestContractText('Master services agreement: v1 terms.\n')).toBe(MSA_DIGEST);
    expect(await digestContractText('Master services agreement: v1 terms.\r\n')).toBe(MSA_DIGEST);
  });

  it('distinguishes a one-character edit', async () => {
    const a = await digestContractText('pay on the first of the month\n');
    const b = await digestContractText('pay on the first of the månth\n');
    expect(a).not.toBe(b);
  });
});
