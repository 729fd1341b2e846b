import type { HealthResponse, Turn } from "./types.js";

const EXCERPT_CHARS = 200;

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function formatScore(score: number): string {
  return score.toFixed(2);
}

export function excerpt(text: string): string {
  if (text.length <= EXCERPT_CHARS) return text;
  return `${text.slice(0, EXCERPT_CHARS)}…`;
}

/** Sources panel: a pure rendering of the response's sources array. */
export function renderSources(turn: Turn): string {
  if (turn.mode === "vanilla") {
    return '<p class="no-retrieval">no retrieval — vanilla mode</p>';
  }
  if (turn.sources.length === 0) {
    return '<p class="no-retrieval">no sources returned</p>';
  }
  const items = turn.sources
    .map(
      (s) => `<li class="source">
  <span class="source-rank">${s.rank}</span>
  <span class="source-score">${formatScore(s.score)}</span>
  <span class="source-doc">${escapeHtml(s.doc_id)}</span>
  <p class="source-excerpt">${escapeHtml(excerpt(s.text))}</p>
</li>`,
    )
    .join("\n");
  return `<ul class="sources">\n${items}\n</ul>`;
}

export function renderTurn(turn: Turn): string {
  const question = `<p class="question">${escapeHtml(turn.question)}</p>`;
  let body: string;
  switch (turn.status) {
    case "pending":
      body = '<p class="pending">waiting for answer…</p>';
      break;
    case "error":
      body = `<p class="error-badge">error ${escapeHtml(turn.error?.code ?? "Unknown")}</p>
<p class="error-detail">${escapeHtml(turn.error?.detail ?? "")}</p>`;
      break;
    case "done":
      body = `<p class="answer">${escapeHtml(turn.answer)}</p>
<details class="sources-panel">
  <summary>Sources (${turn.sources.length})</summary>
  ${renderSources(turn)}
</details>
<p class="meta">${escapeHtml(turn.model)} · ${turn.latencyMs} ms · ${escapeHtml(turn.mode)}</p>`;
      break;
  }
  return `<article class="turn turn-${turn.status}" data-turn-id="${turn.id}">
${question}
${body}
</article>`;
}

export function renderTranscript(turns: readonly Turn[]): string {
  return turns.map(renderTurn).join("\n");
}

export function renderHealth(health: HealthResponse | null, failure?: string): string {
  if (health === null) {
    return `<span class="health health-down">service unavailable${
      failure ? `: ${escapeHtml(failure)}` : ""
    }</span>`;
  }
  return `<span class="health health-ok">${health.index_entries} chunks · d=${health.dimension} · ${escapeHtml(
    health.embedder_fingerprint,
  )}</span>`;
}
