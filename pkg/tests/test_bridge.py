import asyncio
import base64
import json

from websockets.asyncio.client import connect

from gesturelab.controlplane.bridge import DashboardBridge
from gesturelab.controlplane.server import LabServer

IMG = base64.b64encode(b"P5 1 1 255\n\x00").decode()


async def ws_send(ws, **message):
    await ws.send(json.dumps(message))


async def ws_recv(ws, timeout=5.0):
    return json.loads(await asyncio.wait_for(ws.recv(), timeout))


async def ws_recv_type(ws, wanted, timeout=5.0):
    while True:
        message = await ws_recv(ws, timeout)
        if message["type"] == wanted:
            return message


async def http_get(port, path):
    reader, writer = await asyncio.open_connection("127.0.0.1", port)
    writer.write(f"GET {path} HTTP/1.1\r\nHost: t\r\nConnection: close\r\n\r\n".encode())
    await writer.drain()
    raw = await asyncio.wait_for(reader.read(), 5.0)
    writer.close()
    head, _, body = raw.partition(b"\r\n\r\n")
    status = int(head.split(b" ", 2)[1])
    headers = {}
    for line in head.split(b"\r\n")[1:]:
        name, _, value = line.partition(b":")
        headers[name.decode().lower()] = value.decode().strip()
    return status, headers, body


def run_with_stack(static_root, scenario):
    async def main():
        server = LabServer(unlock_ttl=0.2, tick_interval=0.05)
        await server.start()
        bridge = DashboardBridge("127.0.0.1", server.port, static_root=static_root)
        await bridge.start()
        try:
            await scenario(server, bridge)
        finally:
            await bridge.close()
            await server.close()

    asyncio.run(main())


def test_ws_clients_speak_the_wire_protocol(tmp_path):
    async def scenario(server, bridge):
        url = f"ws://127.0.0.1:{bridge.port}/ws"
        async with connect(url) as operator, connect(url) as dashboard:
            await ws_send(operator, type="hello", role="operator")
            hello = await ws_recv(operator)
            assert hello["type"] == "hello" and hello["devices"]["fan1"]["state"] == "off"
            await ws_send(dashboard, type="hello", role="dashboard")
            await ws_recv(dashboard)

            await ws_send(operator, type="device_command", text="fan on")
            reply = await ws_recv(operator)
            assert reply["type"] == "device_state" and reply["state"] == "on"
            seen = await ws_recv_type(dashboard, "device_state")
            assert seen["device_id"] == "fan1" and seen["state"] == "on"

    run_with_stack(None, scenario)


def test_ws_and_tcp_peers_share_one_bus(tmp_path):
    async def scenario(server, bridge):
        reader, writer = await asyncio.open_connection("127.0.0.1", server.port)
        writer.write(json.dumps({"type": "hello", "role": "sensor"}).encode() + b"\n")
        await writer.drain()
        await asyncio.wait_for(reader.readline(), 5.0)

        async with connect(f"ws://127.0.0.1:{bridge.port}/ws") as operator:
            await ws_send(operator, type="hello", role="operator")
            await ws_recv(operator)

            writer.write(json.dumps({
                "type": "entry_request", "id": "s1", "image_b64": IMG}).encode() + b"\n")
            await writer.drain()

            request = await ws_recv_type(operator, "entry_request")
            assert request["id"] == "s1"

            await ws_send(operator, type="entry_decision", id="s1", allow=True)
            ack = await ws_recv_type(operator, "ack")
            assert ack["outcome"] == "applied"

            # the tcp peer hears the winning decision
            while True:
                line = await asyncio.wait_for(reader.readline(), 5.0)
                message = json.loads(line)
                if message["type"] == "entry_decision":
                    assert message["allow"] is True
                    break
        writer.close()

    run_with_stack(None, scenario)


def test_static_files_served_beside_ws(tmp_path):
    (tmp_path / "index.html").write_text("<!doctype html><title>lab</title>")
    (tmp_path / "app.js").write_text("console.log('hi')")

    async def scenario(server, bridge):
        status, headers, body = await http_get(bridge.port, "/")
        assert status == 200
        assert headers["content-type"].startswith("text/html")
        assert b"lab" in body

        status, headers, _ = await http_get(bridge.port, "/app.js")
        assert status == 200
        assert "javascript" in headers["content-type"]

        status, _, _ = await http_get(bridge.port, "/missing.css")
        assert status == 404

        status, _, _ = await http_get(bridge.port, "/../../etc/passwd")
        assert status in (403, 404)

    run_with_stack(str(tmp_path), scenario)


def test_http_without_dashboard_root_is_404():
    async def scenario(server, bridge):
        status, _, body = await http_get(bridge.port, "/")
        assert status == 404
        assert b"no dashboard" in body

    run_with_stack(None, scenario)
