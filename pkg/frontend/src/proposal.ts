// Proposal page: the contract text, the digest integrity check, everyone's
// votes as they arrive, and this session's own vote buttons. Nothing is
// rendered optimistically; the DOM always reflects the server's last word.

import { ApiError, ProposalView, castVote, finalize, getProposal } from './api.js';
import { digestContractText } from './hash.js';

export function esc(value: string): string {
  return value
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function voteRows(view: ProposalView): string {
  const rows: string[] = [];
  for (const [sid, sub] of Object.entries(view.submissions)) {
    const hashState = sub.submitted_hash === view.expected_hash ? 'ok' : 'mismatch';
    rows.push(
      `<tr class="vote-row" data-signatory="${esc(sid)}">` +
        `<td>${esc(sid)}</td>` +
        `<td class="vote">${sub.vote ? 'yes' : 'no'}</td>` +
        `<td class="hash-state">${hashState}</td></tr>`,
    );
  }
  for (const sid of view.pending_signatories) {
    rows.push(
      `<tr class="vote-row pending" data-signatory="${esc(sid)}">` +
        `<td>${esc(sid)}</td><td class="vote">&mdash;</td><td class="hash-state">&mdash;</td></tr>`,
    );
  }
  return rows.join('');
}

export async function renderProposal(
  container: HTMLElement,
  view: ProposalView,
  signatoryId: string,
): Promise<void> {
  const localDigest = await digestContractText(view.text);
  const intact = localDigest === view.expected_hash;
  const canVote =
    view.status === 'open' && view.pending_signatories.includes(signatoryId);
  container.innerHTML = `
    <h2>${esc(view.id)} <small>[${view.kind}]</small></h2>
    <p class="status">status: <b>${view.status}</b>, tally: <b>${view.tally}</b></p>
    ${view.parent_version_id ? `<p class="amends">amends version ${esc(view.parent_version_id)}</p>` : ''}
    ${
      intact
        ? ''
        : `<div class="integrity-warning">INTEGRITY WARNING: the text shown below
           hashes to <code>${localDigest}</code>, but the server says this proposal
           is about <code>${esc(view.expected_hash)}</code>. Do not vote on it.</div>`
    }
    <pre class="contract-text">${esc(view.text)}</pre>
    <p class="digest">digest (computed locally): <code class="local-digest">${localDigest}</code></p>
    <table class="votes"><tbody>${voteRows(view)}</tbody></table>
    ${
      view.version_id
        ? `<p class="version">version <code>${esc(view.version_id)}</code> at block ${view.block_index}</p>`
        : ''
    }
    ${
      canVote && intact
        ? `<p class="actions">voting as <b>${esc(signatoryId)}</b>:
           <button class="vote-yes">confirm and vote yes</button>
           <button class="vote-no">vote no</button></p>`
        : ''
    }
    <p class="error-banner" hidden></p>
  `;
}

export interface ProposalPage {
  refresh(): Promise<void>;
}

export function mountProposalPage(
  container: HTMLElement,
  proposalId: string,
  signatoryId: string,
): ProposalPage {
  let busy = false;

  function showError(err: unknown): void {
    let banner = container.querySelector<HTMLElement>('.error-banner');
    if (!banner) {
      banner = container.ownerDocument.createElement('p');
      banner.className = 'error-banner';
      container.append(banner);
    }
    banner.hidden = false;
    banner.textContent =
      err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  }

  async function apply(view: ProposalView): Promise<void> {
    await renderProposal(container, view, signatoryId);
    container.querySelector('.vote-yes')?.addEventListener('click', () => {
      void vote(view, true);
    });
    container.querySelector('.vote-no')?.addEventListener('click', () => {
      void vote(view, false);
    });
    // Once everyone has agreed, ask the service to freeze the version and
    // mine its block. Another session may get there first; losing that race
    // is not an error.
    if (view.tally === 'approved' && !view.version_id && !busy) {
      busy = true;
      try {
        await finalize(proposalId);
        await refresh();
      } catch (err) {
        if (!(err instanceof ApiError && err.code === 'ALREADY_FINALIZED')) {
          showError(err);
        }
      } finally {
        busy = false;
      }
    }
  }

  async function vote(view: ProposalView, choice: boolean): Promise<void> {
    try {
      // Confirm the digest of the text actually read, not the server's claim.
      const digest = await digestContractText(view.text);
      const updated = await castVote(proposalId, signatoryId, digest, choice);
      await apply(updated);
    } catch (err) {
      showError(err);
    }
  }

  async function refresh(): Promise<void> {
    try {
      await apply(await getProposal(proposalId));
    } catch (err) {
      showError(err);
    }
  }

  return { refresh };
}
