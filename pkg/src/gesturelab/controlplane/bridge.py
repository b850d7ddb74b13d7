"""WebSocket bridge and static dashboard hosting.

Browsers cannot speak raw TCP, so the dashboard connects to /ws here and
every WebSocket text frame is relayed to the lab server as one line (and
every line back as one frame). The bridge adds no message types and keeps
no protocol state; it is a dumb pipe per connection.

Any other GET path serves files from the dashboard root, if one was given,
so `index.html` and the compiled scripts come from the same origin as the
WebSocket endpoint.
"""

from __future__ import annotations

import asyncio
import http
import mimetypes
import posixpath
from pathlib import Path
from typing import Optional

from websockets.asyncio.server import ServerConnection, serve
from websockets.datastructures import Headers
from websockets.http11 import Request, Response


class DashboardBridge:
    def __init__(self, backend_host: str, backend_port: int,
                 static_root: Optional[str] = None, ws_path: str = "/ws"):
        self.backend_host = backend_host
        self.backend_port = backend_port
        self.static_root = Path(static_root).resolve() if static_root else None
        self.ws_path = ws_path
        self._server = None

    async def start(self, host: str = "127.0.0.1", port: int = 0) -> None:
        self._server = await serve(self._relay, host, port,
                                   process_request=self._process_request)

    @property
    def port(self) -> int:
        return self._server.sockets[0].getsockname()[1]

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def serve_forever(self) -> None:
        await self._server.serve_forever()

    # -- websocket <-> tcp relay --------------------------------------------

    async def _relay(self, connection: ServerConnection) -> None:
        try:
            reader, writer = await asyncio.open_connection(
                self.backend_host, self.backend_port)
        except OSError:
            await connection.close(1013, "backend unavailable")
            return

        async def ws_to_tcp():
            async for message in connection:
                if isinstance(message, bytes):
                    message = message.decode("utf-8", "replace")
                writer.write(message.encode("utf-8") + b"\n")
                await writer.drain()

        async def tcp_to_ws():
            while True:
                line = await reader.readline()
                if not line:
                    break
                await connection.send(line.decode("utf-8").rstrip("\n"))

        pumps = [asyncio.create_task(ws_to_tcp()), asyncio.create_task(tcp_to_ws())]
        try:
            await asyncio.wait(pumps, return_when=asyncio.FIRST_COMPLETED)
        finally:
            for pump in pumps:
                pump.cancel()
            writer.close()
            await connection.close()

    # -- static files ---------------------------------------------------------

    def _process_request(self, connection: ServerConnection, request: Request):
        path = request.path.split("?", 1)[0]
        if path == self.ws_path:
            return None  # proceed with the websocket handshake
        if self.static_root is None:
            return self._plain(http.HTTPStatus.NOT_FOUND, "no dashboard configured\n")
        return self._serve_file(path)

    def _plain(self, status: http.HTTPStatus, text: str) -> Response:
        body = text.encode()
        # the connection is dropped after each plain response, so say so,
        # or keep-alive clients will reuse a dead socket
        headers = Headers([("Content-Type", "text/plain; charset=utf-8"),
                           ("Content-Length", str(len(body))),
                           ("Connection", "close")])
        return Response(status.value, status.phrase, headers, body)

    def _serve_file(self, path: str) -> Response:
        clean = posixpath.normpath(path.lstrip("/")) or "."
        if clean.startswith(".."):
            return self._plain(http.HTTPStatus.FORBIDDEN, "forbidden\n")
        target = (self.static_root / clean).resolve()
        if target.is_dir():
            target = target / "index.html"
        if not str(target).startswith(str(self.static_root)) or not target.is_file():
            return self._plain(http.HTTPStatus.NOT_FOUND, f"not found: {path}\n")
        body = target.read_bytes()
        content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        headers = Headers([("Content-Type", content_type),
                           ("Content-Length", str(len(body))),
                           ("Connection", "close")])
        return Response(http.HTTPStatus.OK.value, http.HTTPStatus.OK.phrase, headers, body)
