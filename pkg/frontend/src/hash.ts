// Client-side mirror of the server's canonicalization and digest rules.
// Digests are recomputed locally so the user never has to trust the
// server's displayed hash.

export function canonicalize(text: string): string {
  const unified = text.replace(/\r\n/g, '\n').replace(/\r/g, '\n');
  if (unified === '') {
    return '';
  }
  return unified.replace(/\n+$/, '') + '\n';
}

export async function sha256Hex(data: Uint8Array): Promise<string> {
  const digest = await crypto.subtle.digest('SHA-256', data as BufferSource);
  let out = '';
  for (const b of new Uint8Array(digest)) {
    out += b.toString(16).padStart(2, '0');
  }
  return out;
}

export async function digestContractText(text: string): Promise<string> {
  return sha256Hex(new TextEncoder().encode(canonicalize(text)));
}

export async function digestFile(file: File): Promise<string> {
  const raw = new TextDecoder('utf-8', { fatal: true }).decode(
    await file.arrayBuffer(),
  );
  return digestContractText(raw);
}
