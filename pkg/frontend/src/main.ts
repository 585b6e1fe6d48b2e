import { ApiClient } from "./api.js";
import { initChatView } from "./views/chat.js";
import { initDatasetsView } from "./views/datasets.js";
import { initDrugsView } from "./views/drugs.js";
import { initTermmapView } from "./views/termmap.js";
import { initTranslateView } from "./views/translate.js";

type ViewInit = (root: HTMLElement, client: ApiClient) => void;

const VIEWS: Array<[string, string, ViewInit]> = [
  ["datasets", "Datasets", initDatasetsView],
  ["drugs", "Drugs", initDrugsView],
  ["termmap", "Terminology", initTermmapView],
  ["translate", "Translate", initTranslateView],
  ["chat", "Chat", initChatView],
];

function main(): void {
  const client = new ApiClient("");

  const tokenInput = document.getElementById("token") as HTMLInputElement | null;
  if (tokenInput) {
    tokenInput.addEventListener("change", () => {
      client.setToken(tokenInput.value.trim() || null);
    });
  }

  const nav = document.getElementById("nav");
  const outlet = document.getElementById("outlet");
  if (!nav || !outlet) return;

  const panes = new Map<string, HTMLElement>();
  for (const [key, label, init] of VIEWS) {
    const pane = document.createElement("section");
    pane.hidden = true;
    init(pane, client);
    outlet.appendChild(pane);
    panes.set(key, pane);

    const tab = document.createElement("button");
    tab.textContent = label;
    tab.dataset.view = key;
    tab.addEventListener("click", () => show(key));
    nav.appendChild(tab);
  }

  function show(key: string) {
    for (const [k, pane] of panes) {
      pane.hidden = k !== key;
    }
    nav!.querySelectorAll("button").forEach((b) => {
      b.classList.toggle("active", b.dataset.view === key);
    });
  }

  show("datasets");
}

main();
