import { ApiClient, BatchItem, TermCandidate } from "../api.js";
import { LatestWins } from "../lib.js";

function candidateTable(candidates: TermCandidate[]): HTMLElement {
  const table = document.createElement("table");
  const head = document.createElement("tr");
  for (const col of ["rank", "system", "code", "preferred term", "score", "via"]) {
    const th = document.createElement("th");
    th.textContent = col;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const c of candidates) {
    const row = document.createElement("tr");
    const cells = [
      String(c.rank),
      c.system,
      c.code,
      c.preferred_term,
      c.score.toFixed(4),
      c.matched_via,
    ];
    for (const text of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      row.appendChild(td);
    }
    table.appendChild(row);
  }
  return table;
}

function batchBlock(input: string, item: BatchItem): HTMLElement {
  const block = document.createElement("section");
  const heading = document.createElement("h4");
  heading.textContent = input;
  block.appendChild(heading);
  if (item.error !== undefined) {
    const err = document.createElement("p");
    err.className = "banner banner-error";
    err.textContent = item.error;
    block.appendChild(err);
  } else if (item.candidates) {
    block.appendChild(candidateTable(item.candidates));
  }
  return block;
}

export function initTermmapView(root: HTMLElement, client: ApiClient): void {
  const guard = new LatestWins();

  const form = document.createElement("form");
  form.className = "toolbar column";

  const textarea = document.createElement("textarea");
  textarea.rows = 4;
  textarea.placeholder = "One clinical term per line; a single line maps one term";
  form.appendChild(textarea);

  const row = document.createElement("div");
  const systemSelect = document.createElement("select");
  for (const sys of ["", "SNOMED-CT", "LOINC"]) {
    const opt = document.createElement("option");
    opt.value = sys;
    opt.textContent = sys || "both systems";
    systemSelect.appendChild(opt);
  }
  row.appendChild(systemSelect);
  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Map";
  row.appendChild(button);
  form.appendChild(row);
  root.appendChild(form);

  const output = document.createElement("div");
  root.appendChild(output);

  form.addEventListener("submit", async (e) => {
    e.preventDefault();
    const ticket = guard.begin();
    const lines = textarea.value.split("\n").filter((l) => l.trim());
    const system = systemSelect.value || undefined;
    try {
      if (lines.length <= 1) {
        const body = await client.mapTerm(lines[0] ?? "", 5, system);
        if (!guard.isCurrent(ticket)) return;
        output.replaceChildren(candidateTable(body.candidates));
      } else {
        const body = await client.mapBatch(lines, 5, system);
        if (!guard.isCurrent(ticket)) return;
        output.replaceChildren(
          ...body.results.map((item, i) => batchBlock(lines[i], item)),
        );
      }
    } catch (err) {
      if (!guard.isCurrent(ticket)) return;
      const banner = document.createElement("p");
      banner.className = "banner banner-error";
      banner.textContent = err instanceof Error ? err.message : String(err);
      output.replaceChildren(banner);
    }
  });
}
