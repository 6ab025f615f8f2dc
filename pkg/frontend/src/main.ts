// Browser entry point: a small settings form for the service address and
// student token, then the app itself. The token lives only in memory.
import { ApiClient } from "./api.js";
import { mountApp } from "./app.js";

function start(): void {
  const doc = document;
  const shell = doc.getElementById("app");
  if (shell === null) return;

  const form = doc.createElement("form");
  const base = doc.createElement("input");
  base.value = window.location.origin;
  base.placeholder = "service url";
  const token = doc.createElement("input");
  token.placeholder = "student token";
  token.type = "password";
  const go = doc.createElement("button");
  go.textContent = "connect";
  form.append(base, token, go);
  shell.append(form);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const api = new ApiClient({ baseUrl: base.value, token: token.value });
    shell.textContent = "";
    mountApp(shell, api);
  });
}

start();
