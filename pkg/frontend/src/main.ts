import { ApiError, createClient } from "./api.js";
import {
  ChatStore,
  MAX_TOP_K,
  MIN_TOP_K,
  loadSettings,
  saveSettings,
  submitQuestion,
} from "./state.js";
import { renderHealth, renderTranscript } from "./render.js";
import type { Mode, Settings } from "./types.js";

function mustGet<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function baseUrl(): string {
  const meta = document.querySelector<HTMLMetaElement>('meta[name="biorag-base-url"]');
  return meta?.content ?? "";
}

function wire(): void {
  const api = createClient(baseUrl());
  const store = new ChatStore();
  const settings: Settings = loadSettings(localStorage);

  const form = mustGet<HTMLFormElement>("ask-form");
  const input = mustGet<HTMLInputElement>("question");
  const submit = mustGet<HTMLButtonElement>("submit");
  const transcript = mustGet<HTMLDivElement>("transcript");
  const modeSelect = mustGet<HTMLSelectElement>("mode");
  const topKSelect = mustGet<HTMLSelectElement>("top-k");
  const health = mustGet<HTMLElement>("health");

  for (let k = MIN_TOP_K; k <= MAX_TOP_K; k++) {
    const option = document.createElement("option");
    option.value = String(k);
    option.textContent = String(k);
    topKSelect.appendChild(option);
  }
  modeSelect.value = settings.mode;
  topKSelect.value = String(settings.topK);

  const sync = (): void => {
    transcript.innerHTML = renderTranscript(store.all());
    const blocked = store.hasPending() || !input.value.trim();
    submit.disabled = blocked;
    transcript.scrollTop = transcript.scrollHeight;
  };

  modeSelect.addEventListener("change", () => {
    settings.mode = modeSelect.value as Mode;
    saveSettings(localStorage, settings);
  });
  topKSelect.addEventListener("change", () => {
    settings.topK = Number(topKSelect.value);
    saveSettings(localStorage, settings);
  });
  input.addEventListener("input", sync);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const question = input.value;
    input.value = "";
    void submitQuestion(store, api, question, settings).then(sync);
    sync();
  });

  api
    .health()
    .then((h) => {
      health.innerHTML = renderHealth(h);
    })
    .catch((err: unknown) => {
      const detail = err instanceof ApiError ? err.detail : String(err);
      health.innerHTML = renderHealth(null, detail);
    });

  sync();
}

document.addEventListener("DOMContentLoaded", wire);
