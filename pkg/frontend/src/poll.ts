export const POLL_INTERVAL_MS = 2000;

export function startPolling(fn: () => void, intervalMs = POLL_INTERVAL_MS): () => void {
  fn();
  const handle = setInterval(fn, intervalMs);
  return () => clearInterval(handle);
}
