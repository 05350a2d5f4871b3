import { ApiClient } from "./api.js";
import { renderBanner, renderCompare, renderGrid } from "./render.js";
import { ExplorerStore, LAMBDA_STEP } from "./store.js";
import type { MethodName } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function populateTexts(datalist: HTMLDataListElement, texts: string[]): void {
  datalist.replaceChildren();
  for (const text of texts) {
    const option = document.createElement("option");
    option.value = text;
    datalist.appendChild(option);
  }
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const baseUrl =
    params.get("service") ??
    localStorage.getItem("weicom.service") ??
    "http://127.0.0.1:8000";
  localStorage.setItem("weicom.service", baseUrl);

  const api = new ApiClient(baseUrl);
  const store = new ExplorerStore(api);

  const grid = el<HTMLDivElement>("grid");
  const compareHost = el<HTMLDivElement>("compare");
  const banner = el<HTMLDivElement>("banner");
  const lambdaSlider = el<HTMLInputElement>("lambda");
  const lambdaValue = el<HTMLSpanElement>("lambda-value");
  const imageInput = el<HTMLInputElement>("query-image");
  const textInput = el<HTMLInputElement>("query-text");
  const textOptions = el<HTMLDataListElement>("text-options");
  const methodSelect = el<HTMLSelectElement>("method");
  const kInput = el<HTMLInputElement>("k");
  const excludeInput = el<HTMLInputElement>("exclude");
  const embeddingInput = el<HTMLInputElement>("embedding-file");
  const compareButton = el<HTMLButtonElement>("compare-button");
  const compareLambdas = el<HTMLInputElement>("compare-lambdas");
  const status = el<HTMLSpanElement>("status");

  lambdaSlider.min = "0";
  lambdaSlider.max = "1";
  lambdaSlider.step = String(LAMBDA_STEP);
  lambdaSlider.value = String(store.state.lambda);
  lambdaValue.textContent = lambdaSlider.value;

  store.subscribe((state) => {
    lambdaValue.textContent = String(state.lambda);
    status.textContent = state.pending ? "querying..." : "";
    renderBanner(banner, state.error, () => store.retry());
    renderGrid(grid, state.results, api);
  });

  lambdaSlider.oninput = () => store.setLambda(Number(lambdaSlider.value));
  imageInput.onchange = () => store.setQueryImage(imageInput.value || null);
  textInput.onchange = () => store.setQueryText(textInput.value.toLowerCase());
  methodSelect.onchange = () => store.setMethod(methodSelect.value as MethodName);
  kInput.onchange = () => store.setK(Number(kInput.value));
  excludeInput.onchange = () => store.setExcludeQuery(excludeInput.checked);

  // optional out-of-corpus query: a JSON array of floats
  embeddingInput.onchange = async () => {
    const file = embeddingInput.files?.[0];
    if (!file) return;
    try {
      const parsed = JSON.parse(await file.text()) as unknown;
      if (!Array.isArray(parsed) || !parsed.every((x) => typeof x === "number")) {
        throw new Error("expected a JSON array of numbers");
      }
      imageInput.value = "";
      store.setUploadedEmbedding(parsed);
    } catch (err) {
      renderBanner(banner, `embedding file rejected: ${String(err)}`, () => {});
    }
  };

  compareButton.onclick = async () => {
    const lambdas = compareLambdas.value
      .split(",")
      .map((s) => s.trim())
      .filter((s) => s.length > 0)
      .map(Number);
    try {
      const columns = await store.compare(lambdas);
      renderCompare(compareHost, columns, api);
    } catch (err) {
      renderBanner(banner, String(err instanceof Error ? err.message : err), () => {});
    }
  };

  try {
    const health = await api.health();
    status.textContent = `corpus: ${health.corpus.count} images, dim ${health.corpus.dim}`;
    const vocabulary = await api.vocabulary();
    populateTexts(textOptions, vocabulary.texts);
  } catch (err) {
    renderBanner(banner, `service unreachable at ${baseUrl}: ${String(err)}`, () =>
      window.location.reload(),
    );
  }
}

void boot();
