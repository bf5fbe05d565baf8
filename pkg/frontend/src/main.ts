import { ApiClient } from "./api.js";
import { App } from "./dom.js";

const root = document.getElementById("app");
if (root) {
    const app = new App(new ApiClient(""), root);
    void app.start();
}
