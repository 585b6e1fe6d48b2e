import { ApiClient, DatasetHit, Tier } from "../api.js";
import {
  LatestWins,
  formatCount,
  formatScore,
  tierBadgeClass,
  verdictBadgeClass,
} from "../lib.js";

const TIERS: Array<Tier | ""> = ["", "open", "restricted", "credentialed"];

function renderHit(hit: DatasetHit): HTMLElement {
  const card = document.createElement("article");
  card.className = "card";

  const header = document.createElement("header");
  const title = document.createElement("strong");
  title.textContent = hit.dataset.name;
  header.appendChild(title);

  const tierBadge = document.createElement("span");
  tierBadge.className = tierBadgeClass(hit.dataset.tier);
  tierBadge.textContent = hit.dataset.tier;
  header.appendChild(tierBadge);

  const verdictBadge = document.createElement("span");
  verdictBadge.className = verdictBadgeClass(hit.access.verdict);
  verdictBadge.textContent = hit.access.verdict;
  verdictBadge.title = `${hit.access.code}: ${hit.access.message}`;
  header.appendChild(verdictBadge);

  if (hit.score !== undefined) {
    const score = document.createElement("span");
    score.className = "score";
    score.textContent = formatScore(hit.score);
    header.appendChild(score);
  }
  card.appendChild(header);

  const snippet = document.createElement("p");
  snippet.textContent = hit.snippet ?? hit.dataset.description;
  card.appendChild(snippet);

  const meta = document.createElement("footer");
  meta.textContent =
    `${hit.dataset.id} · ${formatCount(hit.dataset.record_count, hit.dataset.count_unit)}` +
    ` · ${hit.dataset.modality_tags.join(", ")}`;
  card.appendChild(meta);
  return card;
}

export function initDatasetsView(root: HTMLElement, client: ApiClient): void {
  const guard = new LatestWins();

  const form = document.createElement("form");
  form.className = "toolbar";

  const input = document.createElement("input");
  input.type = "search";
  input.placeholder = "Semantic dataset search (blank = list all)";
  form.appendChild(input);

  const tierSelect = document.createElement("select");
  for (const tier of TIERS) {
    const opt = document.createElement("option");
    opt.value = tier;
    opt.textContent = tier || "all tiers";
    tierSelect.appendChild(opt);
  }
  form.appendChild(tierSelect);

  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Search";
  form.appendChild(button);
  root.appendChild(form);

  const status = document.createElement("p");
  status.className = "status";
  root.appendChild(status);

  const results = document.createElement("div");
  root.appendChild(results);

  async function run() {
    const ticket = guard.begin();
    const q = input.value.trim();
    const tier = (tierSelect.value || undefined) as Tier | undefined;
    status.textContent = "loading…";
    try {
      const body = q
        ? await client.searchDatasets(q, 10, tier)
        : await client.listDatasets(tier);
      if (!guard.isCurrent(ticket)) return;
      results.replaceChildren(...body.results.map(renderHit));
      status.textContent = `${body.results.length} result(s)`;
    } catch (err) {
      if (!guard.isCurrent(ticket)) return;
      results.replaceChildren();
      status.textContent = `error: ${err instanceof Error ? err.message : err}`;
    }
  }

  form.addEventListener("submit", (e) => {
    e.preventDefault();
    void run();
  });
  tierSelect.addEventListener("change", () => void run());
  void run();
}
