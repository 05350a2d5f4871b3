import type { ApiClient } from "./api.js";
import type { CompareColumn } from "./store.js";
import type { RetrieveResult } from "./types.js";

// Rendering is deliberately dumb: rank order is response order, every
// number shown comes out of a response field.

function resultCard(item: RetrieveResult, api: ApiClient): HTMLElement {
  const card = document.createElement("figure");
  card.className = "card";

  const img = document.createElement("img");
  img.loading = "lazy";
  img.src = api.imageUrl(item.id);
  img.alt = item.id;
  img.onerror = () => {
    img.removeAttribute("src");
    img.classList.add("missing"); // placeholder keeps the grid geometry
  };
  card.appendChild(img);

  const caption = document.createElement("figcaption");
  const attrs = Object.entries(item.attributes)
    .map(([k, v]) => `${k}=${v}`)
    .join(" ");
  caption.textContent = `#${item.rank} ${item.id} (${item.class}${attrs ? ", " + attrs : ""}) score ${item.score}`;
  card.appendChild(caption);
  return card;
}

export function renderGrid(
  container: HTMLElement,
  results: RetrieveResult[],
  api: ApiClient,
): void {
  container.replaceChildren();
  for (const item of results) {
    container.appendChild(resultCard(item, api));
  }
}

export function renderCompare(
  container: HTMLElement,
  columns: CompareColumn[],
  api: ApiClient,
): void {
  container.replaceChildren();
  for (const column of columns) {
    const section = document.createElement("section");
    section.className = "compare-column";
    const heading = document.createElement("h3");
    heading.textContent = `lambda = ${column.lambda}`;
    section.appendChild(heading);
    if (column.error !== null) {
      const note = document.createElement("p");
      note.className = "error";
      note.textContent = column.error;
      section.appendChild(note);
    } else if (column.results !== null) {
      const grid = document.createElement("div");
      grid.className = "grid";
      renderGrid(grid, column.results, api);
      section.appendChild(grid);
    }
    container.appendChild(section);
  }
}

export function renderBanner(
  container: HTMLElement,
  error: string | null,
  onRetry: () => void,
): void {
  container.replaceChildren();
  if (error === null) {
    container.hidden = true;
    return;
  }
  container.hidden = false;
  const text = document.createElement("span");
  text.textContent = error;
  const retry = document.createElement("button");
  retry.textContent = "retry";
  retry.onclick = onRetry;
  container.append(text, retry);
}
