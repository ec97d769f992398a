// Hash-route wiring: #/proposal/<id>/as/<signatory>, #/history/<contract>,
// #/verify. The service address comes from ?api= or defaults to same origin.

import { configure } from './api.js';
import { mountHistoryPage } from './history.js';
import { startPolling } from './poll.js';
import { mountProposalPage } from './proposal.js';
import { mountVerifyPage } from './verify.js';

const app = document.getElementById('app') as HTMLElement;
let stopPolling: (() => void) | null = null;

function route(): void {
  if (stopPolling) {
    stopPolling();
    stopPolling = null;
  }
  const parts = location.hash.replace(/^#\/?/, '').split('/');
  if (parts[0] === 'proposal' && parts[1] && parts[2] === 'as' && parts[3]) {
    const page = mountProposalPage(app, parts[1], parts[3]);
    stopPolling = startPolling(() => void page.refresh());
  } else if (parts[0] === 'history' && parts[1]) {
    const page = mountHistoryPage(app, parts[1]);
    stopPolling = startPolling(() => void page.refresh());
  } else if (parts[0] === 'verify') {
    mountVerifyPage(app);
  } else {
    app.innerHTML = `
      <h2>pact dashboard</h2>
      <p>open one of:</p>
      <ul>
        <li><code>#/proposal/&lt;proposal-id&gt;/as/&lt;signatory-id&gt;</code></li>
        <li><code>#/history/&lt;contract-id&gt;</code></li>
        <li><code>#/verify</code></li>
      </ul>
    `;
  }
}

configure(new URLSearchParams(location.search).get('api') ?? '');
window.addEventListener('hashchange', route);
route();
