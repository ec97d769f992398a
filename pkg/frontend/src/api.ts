// Thin typed client of the ledger service. All state lives server-side;
// every function returns the server's own response document.

export interface Submission {
  submitted_hash: string;
  vote: boolean;
  vote_signature: string;
}

export interface ProposalView {
  id: string;
  group_id: string;
  kind: 'original' | 'amendment';
  parent_version_id: string;
  text: string;
  expected_hash: string;
  status: 'open' | 'approved' | 'rejected';
  tally: 'pending' | 'approved' | 'rejected';
  submissions: Record<string, Submission>;
  pending_signatories: string[];
  version_id: string | null;
  block_index: number | null;
}

export interface GroupView {
  id: string;
  signatories: { id: string; display_name: string; public_key: string }[];
  proposal_ids: string[];
}

export interface HistoryEntry {
  version_id: string;
  contract_hash: string;
  owner_pubkey: string;
  block_index: number;
}

export interface VerifyReport {
  found: boolean;
  digest: string;
  block_index?: number;
  version_id?: string;
  lineage_root?: string;
  owner_pubkey?: string;
}

export class ApiError extends Error {
  code: string;
  httpStatus: number;

  constructor(code: string, message: string, httpStatus: number) {
    super(message);
    this.code = code;
    this.httpStatus = httpStatus;
  }
}

let baseUrl = '';
let fetchImpl: typeof fetch = (...args) => fetch(...args);

export function configure(base: string, impl?: typeof fetch): void {
  baseUrl = base.replace(/\/$/, '');
  if (impl) {
    fetchImpl = impl;
  }
}

async function call<T>(method: string, path: string, body?: unknown, headers?: Record<string, string>): Promise<T> {
  let response: Response;
  try {
    response = await fetchImpl(baseUrl + path, {
      method,
      headers: { 'Content-Type': 'application/json', ...headers },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  } catch (err) {
    throw new ApiError('UNREACHABLE', `cannot reach the service: ${err}`, 0);
  }
  const payload = await response.json();
  if (!response.ok) {
    throw new ApiError(
      payload.code ?? 'HTTP_' + response.status,
      payload.message ?? response.statusText,
      response.status,
    );
  }
  return payload as T;
}

export function getGroup(id: string): Promise<GroupView> {
  return call('GET', `/groups/${id}`);
}

export function getProposal(id: string): Promise<ProposalView> {
  return call('GET', `/proposals/${id}`);
}

export function castVote(
  proposalId: string,
  signatoryId: string,
  submittedHash: string,
  vote: boolean,
): Promise<ProposalView> {
  // No signature field: the service signs with the key it custodies for
  // this signatory. The header lets it cross-check the acting identity.
  return call(
    'POST',
    `/proposals/${proposalId}/votes`,
    { signatory_id: signatoryId, submitted_hash: submittedHash, vote },
    { 'X-Signatory-Id': signatoryId },
  );
}

export function finalize(proposalId: string): Promise<unknown> {
  return call('POST', `/proposals/${proposalId}/finalize`, {});
}

export function getHistory(contractId: string): Promise<HistoryEntry[]> {
  return call('GET', `/contracts/${contractId}/history`);
}

export function verifyText(text: string): Promise<VerifyReport> {
  return call('POST', '/verify', { text });
}
