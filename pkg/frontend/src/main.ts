import { Dashboard } from "./app.js";

const root = document.getElementById("app");
if (root) {
  new Dashboard(root);
}
