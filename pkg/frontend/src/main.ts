import { createApp } from "./app.js";
import { socketTransport } from "./transport.js";

const scheme = location.protocol === "https:" ? "wss" : "ws";
const socket = new WebSocket(`${scheme}://${location.host}/ws`);
createApp(document, socketTransport(socket));
