import { ApiClient } from "./api.js";
import { el } from "./dom.js";
import { buildPanel } from "./panels/build.js";
import { heatPanel } from "./panels/heat.js";
import { queryPanel } from "./panels/query.js";
import { streamPanel } from "./panels/stream.js";
import { wizardPanel } from "./panels/wizard.js";
import { Session } from "./session.js";

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? "http://127.0.0.1:8000";
}

function boot(): void {
  const api = new ApiClient(apiBase());
  const session = new Session();
  const root = document.getElementById("app");
  if (!root) return;

  const heat = heatPanel(api, session);
  const stream = streamPanel(api, session);
  const notifyIndexes = () => {
    stream.dispatchEvent(new Event("indexes-changed"));
  };
  root.append(
    el("header", {}, [
      el("h1", {}, ["sortsax explorer"]),
      el("p", { class: "muted" }, [
        `talking to ${apiBase()} — build indexes, draw queries, stream data, `,
        "compare access patterns, consult the recommender",
      ]),
    ]),
    buildPanel(api, session, notifyIndexes),
    queryPanel(api, session, () => void heat.refresh()),
    heat.element,
    stream,
    wizardPanel(api),
  );
  void heat.refresh();
}

boot();
