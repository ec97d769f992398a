// Verify page: drop in a text file, hash it locally, ask the chain.

import { verifyText } from './api.js';
import { digestFile } from './hash.js';
import { esc } from './proposal.js';

export function mountVerifyPage(container: HTMLElement): void {
  container.innerHTML = `
    <h2>verify a document</h2>
    <p>The file is hashed in your browser; only the text is sent for lookup.</p>
    <input type="file" class="file-input">
    <div class="verify-result"></div>
  `;
  const input = container.querySelector<HTMLInputElement>('.file-input')!;
  const result = container.querySelector<HTMLElement>('.verify-result')!;

  input.addEventListener('change', () => {
    const file = input.files?.[0];
    if (file) {
      void check(file);
    }
  });

  async function check(file: File): Promise<void> {
    let localDigest: string;
    try {
      localDigest = await digestFile(file);
    } catch {
      result.innerHTML = `<p class="error-banner">not a UTF-8 text file</p>`;
      return;
    }
    const text = await file.text();
    try {
      const report = await verifyText(text);
      if (report.found) {
        result.innerHTML = `
          <p class="found">notarized: block ${report.block_index},
          version <code>${esc(report.version_id ?? '')}</code></p>
          <p>digest <code class="local-digest">${localDigest}</code></p>
        `;
      } else {
        result.innerHTML = `
          <p class="not-found">not found on the chain</p>
          <p>this file's digest is <code class="local-digest">${localDigest}</code>;
          no accepted version carries it. If you expected a match, the file
          differs from what was signed.</p>
        `;
      }
    } catch (err) {
      result.innerHTML = `<p class="error-banner">${esc(String(err))}</p>`;
    }
  }
}
