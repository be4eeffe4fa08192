import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  // Served by the project service at /ui, so the API lives at the origin root.
  createApp(root, new ApiClient(""));
}
