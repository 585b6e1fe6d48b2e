import { ApiClient } from "../api.js";
import { LatestWins, parseGlossary } from "../lib.js";

export function initTranslateView(root: HTMLElement, client: ApiClient): void {
  const guard = new LatestWins();

  const form = document.createElement("form");
  form.className = "toolbar column";

  const direction = document.createElement("select");
  for (const dir of ["ko-en", "en-ko"]) {
    const opt = document.createElement("option");
    opt.value = dir;
    opt.textContent = dir;
    direction.appendChild(opt);
  }
  form.appendChild(direction);

  const source = document.createElement("textarea");
  source.rows = 5;
  source.placeholder = "Source text";
  form.appendChild(source);

  const glossaryLabel = document.createElement("label");
  glossaryLabel.textContent = "Glossary (one \"source = target\" per line)";
  form.appendChild(glossaryLabel);
  const glossary = document.createElement("textarea");
  glossary.rows = 3;
  glossary.placeholder = "심전도 = electrocardiogram";
  form.appendChild(glossary);

  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Translate";
  form.appendChild(button);
  root.appendChild(form);

  const warningsBanner = document.createElement("div");
  root.appendChild(warningsBanner);

  const result = document.createElement("pre");
  result.className = "result";
  root.appendChild(result);

  form.addEventListener("submit", async (e) => {
    e.preventDefault();
    const ticket = guard.begin();
    const parsed = parseGlossary(glossary.value);
    if (parsed.errors.length > 0) {
      warningsBanner.replaceChildren(
        ...parsed.errors.map((msg) => {
          const p = document.createElement("p");
          p.className = "banner banner-error";
          p.textContent = msg;
          return p;
        }),
      );
      return;
    }
    try {
      const body = await client.translate(direction.value, source.value, parsed.pairs);
      if (!guard.isCurrent(ticket)) return;
      result.textContent = body.result;
      warningsBanner.replaceChildren(
        ...body.warnings.map((msg) => {
          const p = document.createElement("p");
          p.className = "banner banner-warning";
          p.textContent = msg;
          return p;
        }),
      );
    } catch (err) {
      if (!guard.isCurrent(ticket)) return;
      result.textContent = "";
      const p = document.createElement("p");
      p.className = "banner banner-error";
      p.textContent = err instanceof Error ? err.message : String(err);
      warningsBanner.replaceChildren(p);
    }
  });
}
