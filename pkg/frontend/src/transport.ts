/** Thin socket wrapper so the app runs on a browser WebSocket or the
 * `ws` package alike; tests inject fakes through the same interface. */

export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "message" | "close" | "error",
                   listener: (event: any) => void): void;
}

export interface Transport {
  send(msg: object): void;
  close(): void;
  onMessage(handler: (raw: unknown) => void): void;
  onStatus(handler: (connected: boolean) => void): void;
}

export function socketTransport(socket: SocketLike): Transport {
  let messageHandler: (raw: unknown) => void = () => {};
  let statusHandler: (connected: boolean) => void = () => {};

  socket.addEventListener("open", () => statusHandler(true));
  socket.addEventListener("close", () => statusHandler(false));
  socket.addEventListener("message", (event) => {
    const text = typeof event.data === "string" ? event.data : String(event.data);
    let raw: unknown;
    try {
      raw = JSON.parse(text);
    } catch {
      return; // not ours to crash on
    }
    messageHandler(raw);
  });

  return {
    send: (msg) => socket.send(JSON.stringify(msg)),
    close: () => socket.close(),
    onMessage: (handler) => { messageHandler = handler; },
    onStatus: (handler) => { statusHandler = handler; },
  };
}
