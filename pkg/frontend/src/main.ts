import { boot } from "./app";

const root = document.getElementById("app");
if (root) {
  boot(root).catch((err) => {
    root.innerHTML = `<pre class="boot-error">${String(err)}</pre>`;
  });
}
