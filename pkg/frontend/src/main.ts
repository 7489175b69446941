/** Entry point: mount the client against the gateway named in the URL. */

import { GatewayClient } from "./api.js";
import { mountApp } from "./ui.js";

const DEFAULT_GATEWAY = "http://127.0.0.1:8080";

/** `?gateway=` overrides where the gateway lives; default suits local runs. */
export function gatewayBaseFromSearch(search: string): string {
  const value = new URLSearchParams(search).get("gateway");
  return value && value.trim() ? value.trim() : DEFAULT_GATEWAY;
}

const container = document.getElementById("app");
if (container) {
  const base = gatewayBaseFromSearch(window.location.search);
  mountApp(container, new GatewayClient(base));
}
