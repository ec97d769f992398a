// History page: a contract's version lineage as a vertical chain, block
// indices and owner keys included, newest at the bottom.

import { getHistory } from './api.js';
import { esc } from './proposal.js';

export interface HistoryPage {
  refresh(): Promise<void>;
}

export function mountHistoryPage(container: HTMLElement, contractId: string): HistoryPage {
  async function refresh(): Promise<void> {
    let entries;
    try {
      entries = await getHistory(contractId);
    } catch (err) {
      container.innerHTML = `<p class="error-banner">${esc(String(err))}</p>`;
      return;
    }
    const items = entries.map(
      (e) => `
      <li class="version-entry" data-version="${esc(e.version_id)}">
        <span class="block-index">block ${e.block_index}</span>
        <code class="version-id">${esc(e.version_id)}</code>
        <div class="detail">contract hash <code>${esc(e.contract_hash)}</code></div>
        <div class="detail">owner <code>${esc(e.owner_pubkey)}</code></div>
      </li>`,
    );
    container.innerHTML = `
      <h2>lineage of ${esc(contractId)}</h2>
      <ol class="lineage">${items.join('\n')}</ol>
    `;
  }

  return { refresh };
}
