import { ApiClient } from "./api.js";
import { Console } from "./console.js";

// Single configuration knob: <meta name="api-base" content="http://host:port">
// defaults to same-origin relative requests.
const base =
  document.querySelector<HTMLMetaElement>('meta[name="api-base"]')?.content ?? "";
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
void new Console(new ApiClient(base), root).start();
