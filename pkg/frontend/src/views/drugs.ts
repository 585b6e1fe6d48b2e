import { ApiClient, DrugRecord } from "../api.js";
import { LatestWins, atcBreadcrumb } from "../lib.js";

function renderDrug(drug: DrugRecord, onSelect: (d: DrugRecord) => void): HTMLElement {
  const card = document.createElement("article");
  card.className = "card clickable";
  card.addEventListener("click", () => onSelect(drug));

  const title = document.createElement("strong");
  title.textContent = drug.name;
  card.appendChild(title);

  for (const code of drug.atc_codes) {
    const crumb = document.createElement("nav");
    crumb.className = "breadcrumb";
    atcBreadcrumb(code).forEach((prefix, i) => {
      if (i > 0) crumb.appendChild(document.createTextNode(" › "));
      const span = document.createElement("span");
      span.textContent = prefix;
      crumb.appendChild(span);
    });
    card.appendChild(crumb);
  }

  const meta = document.createElement("footer");
  meta.textContent = `${drug.drug_id} · ${drug.main_ingredients.join(", ")}`;
  card.appendChild(meta);
  return card;
}

export function initDrugsView(root: HTMLElement, client: ApiClient): void {
  const searchGuard = new LatestWins();
  const detailGuard = new LatestWins();
  let selected: DrugRecord | null = null;

  const form = document.createElement("form");
  form.className = "toolbar";
  const input = document.createElement("input");
  input.type = "search";
  input.placeholder = "Drug name, ATC code, or ingredient";
  form.appendChild(input);
  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Search";
  form.appendChild(button);
  root.appendChild(form);

  const results = document.createElement("div");
  root.appendChild(results);

  const detail = document.createElement("section");
  detail.className = "detail";
  root.appendChild(detail);

  const sliderLabel = document.createElement("label");
  sliderLabel.textContent = "Neighbor level: ";
  const slider = document.createElement("input");
  slider.type = "range";
  slider.min = "1";
  slider.max = "5";
  slider.value = "4";
  const sliderValue = document.createElement("span");
  sliderValue.textContent = slider.value;
  sliderLabel.appendChild(slider);
  sliderLabel.appendChild(sliderValue);

  const neighborList = document.createElement("div");
  const contraList = document.createElement("ul");

  async function loadDetail() {
    if (!selected) return;
    const ticket = detailGuard.begin();
    const level = Number(slider.value);
    const [neighbors, contra] = await Promise.all([
      client.drugNeighbors(selected.drug_id, level),
      client.drugContraindications(selected.drug_id),
    ]);
    if (!detailGuard.isCurrent(ticket)) return;
    neighborList.replaceChildren(
      ...neighbors.results.map((d) => renderDrug(d, select)),
    );
    contraList.replaceChildren(
      ...contra.results.map((c) => {
        const li = document.createElement("li");
        li.textContent = c;
        return li;
      }),
    );
  }

  function select(drug: DrugRecord) {
    selected = drug;
    const heading = document.createElement("h3");
    heading.textContent = `Therapeutic neighbors of ${drug.name}`;
    const contraHeading = document.createElement("h3");
    contraHeading.textContent = "Contraindications";
    detail.replaceChildren(heading, sliderLabel, neighborList, contraHeading, contraList);
    void loadDetail();
  }

  slider.addEventListener("input", () => {
    sliderValue.textContent = slider.value;
    void loadDetail();
  });

  form.addEventListener("submit", async (e) => {
    e.preventDefault();
    const ticket = searchGuard.begin();
    const body = await client.searchDrugs(input.value.trim());
    if (!searchGuard.isCurrent(ticket)) return;
    results.replaceChildren(...body.results.map((d) => renderDrug(d, select)));
  });
}
